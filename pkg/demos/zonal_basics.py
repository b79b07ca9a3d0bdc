"""
Zonal polynomials and hypergeometric series
===========================================

Zonal polynomials ``C_kappa`` are symmetric polynomials in the eigenvalues of
a matrix, one per integer partition ``kappa``. This script builds them, checks
the two facts everything else leans on, and sums a matrix-argument series.
"""

import numpy as np

from matbeta.combinat import enumerate_partitions
from matbeta.hypermat import SeriesControl, hyper_0f0, hyper_1f1
from matbeta.randmat import haar_orthogonal, random_psd
from matbeta.zonal import power_sum_coefficients, zonal_eval_matrix

rng = np.random.default_rng(1)

###############################################################################
# Each zonal polynomial is a fixed combination of power-sum traces. At degree
# 3 there are three of them:

for kappa in enumerate_partitions(3):
    terms = " + ".join(f"{c} p{''.join(map(str, mu))}"
                       for mu, c in power_sum_coefficients(kappa).items())
    print(f"C_{kappa} = {terms}")

###############################################################################
# They split the power of the trace: summing ``C_kappa(X)`` over all
# partitions of ``k`` gives ``(tr X)^k``.

X = random_psd(4, rng)
for k in range(1, 7):
    total = sum(zonal_eval_matrix(kappa, X) for kappa in enumerate_partitions(k))
    print(f"k = {k}: sum = {total:.12g}   (tr X)^k = {np.trace(X) ** k:.12g}")

###############################################################################
# Only the eigenvalues matter, so a rotation leaves every value unchanged.

H = haar_orthogonal(4, rng)
print("rotation changes C_(2,1) by",
      abs(zonal_eval_matrix((2, 1), H @ X @ H.T) - zonal_eval_matrix((2, 1), X)))

###############################################################################
# The hypergeometric functions of a matrix argument are series over
# partitions. ``0F0`` is the exponential of the trace; the returned tail ratio
# (last shell over the running total) tells how far the truncation is from
# converged.

small = X / np.trace(X)
for k_max in (3, 6, 12):
    val, ratio = hyper_0f0(small, SeriesControl(k_max=k_max, tail_tol=1.0))
    print(f"0F0 with k_max = {k_max:2d}: {val:.15f}  tail ratio {ratio:.1e}"
          f"  (exact {np.exp(1.0):.15f})")

val, ratio = hyper_1f1(1.5, 3.0, small, SeriesControl(k_max=12, tail_tol=1.0))
print(f"1F1(3/2; 3; X / tr X) = {val:.12f}, tail ratio {ratio:.1e}")
