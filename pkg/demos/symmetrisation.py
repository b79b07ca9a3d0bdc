"""
Averaging a density over rotations
==================================

The doubly noncentral type I density depends on the orientation of ``U``
relative to the noncentrality matrices. Averaging it over ``U -> H U H'``
with ``H`` Haar distributed gives a rotation-invariant density that has its
own closed series. Here the Monte Carlo average is checked against it.
"""

import numpy as np

from matbeta import BetaParams, SeriesControl, SpectralPoint
from matbeta.betadist import beta1_dnc_density, beta1_symmetrised_density
from matbeta.randmat import haar_orthogonal, random_psd
from matbeta.verify import symmetrise_mc

rng = np.random.default_rng(7)
ctrl = SeriesControl(k_max=3, tail_tol=1.0)
params = BetaParams(2, 2, 3, 4, omega1=random_psd(2, rng), omega2=random_psd(2, rng))
point = SpectralPoint([0.7, 0.25], haar_orthogonal(2, rng))

###############################################################################
# The unsymmetrised density moves as the point is rotated ...

angles = np.linspace(0, np.pi, 5)
for a in angles:
    H = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    val = beta1_dnc_density(point.rotated(H), params, ctrl)[0].value
    print(f"angle {a:4.2f}: density {val:.6f}")

###############################################################################
# ... while its Haar average matches the symmetrised series.

res = symmetrise_mc(beta1_dnc_density, point, params, n=200_000, seed=11, ctrl=ctrl)
target = beta1_symmetrised_density(point, params, ctrl)[0].value
print(f"Monte Carlo average {res.estimate:.6f} +- {res.std_error:.6f}")
print(f"symmetrised series  {target:.6f}  (z = {res.z_score(target):.2f})")
