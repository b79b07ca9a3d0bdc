"""
Sampling the singular case
==========================

When the numerator scatter matrix has rank ``q < m`` the beta matrix lives on
rank-``q`` matrices and its density is written in spectral coordinates. This
script draws such matrices and compares the largest eigenvalue with the
density integrated over the frame.
"""

import numpy as np
from scipy import stats

from matbeta import BetaParams
from matbeta.randmat import beta1_sample, make_rng
from matbeta.verify import marginal_eigen_density, normalization_check

params = BetaParams(m=2, q=1, r=1, s=3)
draws = beta1_sample(params, make_rng(2026), 100_000)
print("frame shape per draw:", draws.frame.shape[1:], " eigenvalues:", draws.eigenvalues.shape[1:])

###############################################################################
# The frame-averaged marginal density of the nonzero eigenvalue, normalised on
# the grid, against a histogram of the draws.

grid = np.linspace(1e-6, 1 - 1e-6, 1001)
dens = marginal_eigen_density(params, l_grid=grid, n_frames=500, seed=1)
hist, edges = np.histogram(draws.eigenvalues[:, 0], bins=10, range=(0, 1), density=True)
for lo, hi, h in zip(edges[:-1], edges[1:], hist):
    mask = (grid >= lo) & (grid <= hi)
    print(f"[{lo:.1f}, {hi:.1f}): histogram {h:.3f}   density {dens[mask].mean():.3f}")

cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(grid))])
ks = stats.kstest(draws.eigenvalues[:, 0], lambda x: np.interp(x, grid, cdf)).statistic
print(f"KS distance: {ks:.4f}")

###############################################################################
# With the frame volume included, the joint density integrates to one.

res = normalization_check(params, n=100_000, seed=3)
print(f"total mass {res.estimate:.4f} +- {res.std_error:.4f}")
