"""
Polynomials of two matrix arguments
===================================

The doubly noncentral series needs polynomials ``C_phi^{kappa,lambda}(X, Y)``
that are invariant under simultaneous rotation of ``X`` and ``Y``. The
package builds them numerically up to total degree 3 and ships the result.
This script prints them and checks the integral identity they satisfy.
"""

import numpy as np

from matbeta.invariant import default_table, load_fixture
from matbeta.randmat import random_psd
from matbeta.verify import lemma4_check
from matbeta.zonal import zonal_eval_matrix

table = default_table()

###############################################################################
# Mixed components of total degree 2 and 3:

for comp in table:
    if comp.kappa and comp.lam:
        print(comp)

###############################################################################
# Setting ``X = Y`` collapses each component onto the zonal polynomial of the
# same partition, scaled by its constant ``theta``.

A = random_psd(3, np.random.default_rng(3))
for comp in table.components((2,), (1,)):
    print(f"phi = {comp.phi}: C(A, A) = {comp.evaluate(A, A):.10f}, "
          f"theta C_phi(A) = {comp.theta * zonal_eval_matrix(comp.phi, A):.10f}")

###############################################################################
# Averaging ``C(A H'XH, B H'YH)`` over rotations factorises. The residual of
# that identity is zero up to Monte Carlo error for every component.

rng = np.random.default_rng(5)
A, B, X, Y = (random_psd(3, rng) for _ in range(4))
for comp in table:
    if 0 < comp.phi.weight <= 3:
        res = lemma4_check(comp, A, B, X, Y, n=50_000, seed=1)
        print(f"{str(comp.kappa):>7} {str(comp.lam):>7} {str(comp.phi):>7}: "
              f"residual {res.estimate:+.2e} +- {res.std_error:.1e}")

###############################################################################
# The low-degree part is also transcribed from published tables; the two
# sources agree.

boot = {(c.kappa, c.lam, c.phi): c for c in table}
diff = max(abs(v - boot[(c.kappa, c.lam, c.phi)].coeffs[m])
           for c in load_fixture() for m, v in c.coeffs.items())
print(f"largest coefficient difference, fixture vs bootstrap: {diff:.1e}")
