"""Densities of the (singular) matrix variate beta type I and type II laws.

All evaluators take a :class:`SpectralPoint` ``H1 diag(l) H1'`` and a
:class:`BetaParams`; they return log-space values (:class:`LogValue`) so
that large or tiny densities and transiently negative truncated series are
represented faithfully. Leading batch axes of the point (for instance many
rotated frames sharing one spectrum) are carried through.

Densities are with respect to the volume element ``(dU)`` of the manifold of
rank-``q`` positive semidefinite matrices. :func:`eigen_joint_density`
converts to eigenvalue/frame coordinates.

Series evaluators return ``(LogValue, tail_ratio)``. The doubly noncentral
series are truncated at total degree ``k + l <= ctrl.k_max``. For ``m >= 2``
this degree may not exceed the invariant-polynomial table degree (3 for the
shipped table); for ``m = 1`` the polynomials are plain monomials and any
degree is allowed.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .combinat import LogValue, Partition, enumerate_partitions, gen_pochhammer_ln, mv_gamma_ln
from .errors import (
    DegenerateSpectrumError,
    PoleError,
    TruncationWarning,
    UnsupportedDegreeError,
    ValidationError,
)
from .hypermat import SeriesControl, hyper_1f1, tail_ratio_of
from .invariant import InvariantTable, default_table
from .spectral import BetaParams, SpectralPoint
from .zonal import zonal_at_identity

__all__ = [
    "BetaParams",
    "SpectralPoint",
    "SeriesControl",
    "norm_const_ln",
    "beta1_central_density",
    "beta2_central_density",
    "beta1_dnc_density",
    "beta2_dnc_density",
    "beta1_ncA_density",
    "beta1_ncB_density",
    "beta2_ncA_density",
    "beta2_ncB_density",
    "beta1_symmetrised_density",
    "beta2_symmetrised_density",
    "eigen_joint_density",
    "EVALUATORS",
]

TIE_TOL = 1e-10


def norm_const_ln(params: BetaParams) -> LogValue:
    """Log of ``pi^{(rq - mr)/2} Gamma_m[(r+s)/2] / (Gamma_q[r/2] Gamma_m[s/2])``."""
    m, q, r, s = params.m, params.q, params.r, params.s
    num = mv_gamma_ln(m, (r + s) / 2)
    den = mv_gamma_ln(q, r / 2) * mv_gamma_ln(m, s / 2)
    out = num / den
    return LogValue(out.sign, out.log_magnitude + (r * q - m * r) / 2 * math.log(math.pi))


def _check(point: SpectralPoint, params: BetaParams, kind: str):
    if point.kind != kind:
        raise ValidationError(f"expected a {kind} point, got kind {point.kind!r}")
    if point.m != params.m or point.q != params.q:
        raise ValidationError(
            f"point has (m, q) = ({point.m}, {point.q}) but params have "
            f"({params.m}, {params.q})"
        )


def _batch_shape(point):
    return np.broadcast_shapes(point.eigenvalues.shape[:-1], point.frame.shape[:-2])


def _broadcast(lv: LogValue, shape) -> LogValue:
    if shape == ():
        return LogValue(float(lv.sign), float(lv.log_magnitude))
    return LogValue(np.broadcast_to(lv.sign, shape).copy(),
                    np.broadcast_to(lv.log_magnitude, shape).copy())


def beta1_central_density(point: SpectralPoint, params: BetaParams) -> LogValue:
    """``c |L|^{(r-m-1)/2} |I - U|^{(s-m-1)/2}``; ``|L|`` runs over the q
    nonzero eigenvalues."""
    _check(point, params, "beta1")
    m, r, s = params.m, params.r, params.s
    c = norm_const_ln(params)
    l = point.eigenvalues
    lg = c.log_magnitude + (r - m - 1) / 2 * np.log(l).sum(-1) \
        + (s - m - 1) / 2 * np.log1p(-l).sum(-1)
    return _broadcast(LogValue(c.sign * np.ones_like(lg), lg), _batch_shape(point))


def beta2_central_density(point: SpectralPoint, params: BetaParams) -> LogValue:
    """``c |G|^{(r-m-1)/2} |I + F|^{-(r+s)/2}``."""
    _check(point, params, "beta2")
    m, r, s = params.m, params.r, params.s
    c = norm_const_ln(params)
    g = point.eigenvalues
    lg = c.log_magnitude + (r - m - 1) / 2 * np.log(g).sum(-1) \
        - (r + s) / 2 * np.log1p(g).sum(-1)
    return _broadcast(LogValue(c.sign * np.ones_like(lg), lg), _batch_shape(point))


def _combine(central: LogValue, log_etr: float, series, ratio, what) -> tuple[LogValue, object]:
    series = np.asarray(series, dtype=float)
    if np.any(series < 0):
        warnings.warn(f"{what}: truncated series is negative", TruncationWarning, stacklevel=3)
    with np.errstate(divide="ignore"):
        lg = central.log_magnitude + log_etr + np.log(np.abs(series))
    sign = central.sign * np.sign(series)
    if np.ndim(lg) == 0:
        return LogValue(float(sign), float(lg)), ratio
    return LogValue(sign, lg), ratio


# doubly noncentral series -----------------------------------------------------

def _coef_ln(params, kappa, lam, phi):
    """Log of ``(½(r+s))_phi / ((½r)_kappa (½s)_lambda k! l!)`` (sign, log) or None."""
    r, s = params.r, params.s
    num = gen_pochhammer_ln((r + s) / 2, phi)
    if num.sign == 0:
        return None
    den_k = gen_pochhammer_ln(r / 2, kappa)
    den_l = gen_pochhammer_ln(s / 2, lam)
    if den_k.sign == 0 or den_l.sign == 0:
        raise PoleError(f"Pochhammer denominator vanishes at kappa={kappa}, lambda={lam}")
    lg = (num.log_magnitude - den_k.log_magnitude - den_l.log_magnitude
          - math.lgamma(kappa.weight + 1) - math.lgamma(lam.weight + 1))
    return num.sign * den_k.sign * den_l.sign, lg


def _shell_partitions(k, max_parts):
    return enumerate_partitions(k, max_parts) if k else [Partition(())]


def _double_series(params, ctrl, values, with_theta, table, what):
    """Accumulate ``sum_{k+l <= K} coef * [theta] * value`` by shells.

    ``values(kappa, lam, comp)`` returns the kernel value for one component
    (``comp`` is None in the scalar case).
    """
    m, q = params.m, params.q
    K = ctrl.k_max
    scalar = m == 1
    if not scalar and K > table.max_degree:
        raise UnsupportedDegreeError(
            f"k_max = {K} exceeds the invariant table degree {table.max_degree}"
        )
    total, shell = 0.0, 0.0
    for n in range(K + 1):
        shell = 0.0
        for k in range(n, -1, -1):
            l = n - k
            kappas = _shell_partitions(k, 1 if scalar else q)
            lams = _shell_partitions(l, m)
            for kappa in kappas:
                for lam in lams:
                    if scalar:
                        comps = [None]
                    else:
                        comps = [c for c in table.components(kappa, lam) if len(c.phi) <= m]
                    for comp in comps:
                        phi = Partition((n,) if n else ()) if comp is None else comp.phi
                        c = _coef_ln(params, kappa, lam, phi)
                        if c is None:
                            continue
                        sign, lg = c
                        if with_theta and comp is not None:
                            lg += math.log(comp.theta)
                        shell = shell + sign * math.exp(lg) * values(kappa, lam, comp)
        total = total + shell
    ratio = tail_ratio_of(shell, total, ctrl)
    if np.any(np.asarray(ratio) > ctrl.tail_tol):
        warnings.warn(f"{what}: tail ratio {np.max(ratio):.3g} exceeds {ctrl.tail_tol:g}",
                      TruncationWarning, stacklevel=3)
    return total, ratio


def _kernel_values(X, Y, ctrl, table, m):
    """Value lookup for ``C_phi^{kappa,lambda}(X, Y)`` (m >= 2) or ``x^k y^l``."""
    if m == 1:
        x, y = X[..., 0, 0], Y[..., 0, 0]
        return lambda kappa, lam, comp: x ** kappa.weight * y ** lam.weight
    vals = table.evaluate_all(X, Y, ctrl.k_max)
    return lambda kappa, lam, comp: vals[(kappa, lam, comp.phi)]


def _ctrl_table(ctrl, table):
    return ctrl or SeriesControl(), table if table is not None else default_table()


def beta1_dnc_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None,
                      table: InvariantTable | None = None):
    """Doubly noncentral type I density with kernel
    ``theta C_phi^{kappa,lambda}(½ Omega1 U, ½ Omega2 (I - U))``."""
    ctrl, table = _ctrl_table(ctrl, table)
    central = beta1_central_density(point, params)
    U = point.matrix()
    eye = np.eye(params.m)
    X = 0.5 * params.omega1 @ U
    Y = 0.5 * params.omega2 @ (eye - U)
    series, ratio = _double_series(params, ctrl, _kernel_values(X, Y, ctrl, table, params.m),
                                   True, table, "beta1 dnc")
    log_etr = -0.5 * float(np.trace(params.omega1 + params.omega2))
    return _combine(central, log_etr, series, ratio, "beta1 dnc")


def beta2_dnc_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None,
                      table: InvariantTable | None = None):
    """Doubly noncentral type II density with kernel
    ``theta C_phi^{kappa,lambda}(½ Omega1 (I+F)^{-1} F, ½ Omega2 (I+F)^{-1})``."""
    ctrl, table = _ctrl_table(ctrl, table)
    central = beta2_central_density(point, params)
    P = point.transformed_matrix(lambda g: g / (1 + g))  # (I+F)^{-1} F
    eye = np.eye(params.m)
    X = 0.5 * params.omega1 @ P
    Y = 0.5 * params.omega2 @ (eye - P)
    series, ratio = _double_series(params, ctrl, _kernel_values(X, Y, ctrl, table, params.m),
                                   True, table, "beta2 dnc")
    log_etr = -0.5 * float(np.trace(params.omega1 + params.omega2))
    return _combine(central, log_etr, series, ratio, "beta2 dnc")


def _symmetrised_values(point_X, point_Y, params, ctrl, table):
    m = params.m
    A, B = 0.5 * params.omega1, 0.5 * params.omega2
    if m == 1:
        x = A[0, 0] * point_X[..., 0, 0]
        y = B[0, 0] * point_Y[..., 0, 0]
        return lambda kappa, lam, comp: x ** kappa.weight * y ** lam.weight
    left = table.evaluate_all(A, B, ctrl.k_max)
    right = table.evaluate_all(point_X, point_Y, ctrl.k_max)

    def value(kappa, lam, comp):
        key = (kappa, lam, comp.phi)
        return left[key] * right[key] / zonal_at_identity(comp.phi, m)

    return value


def beta1_symmetrised_density(point: SpectralPoint, params: BetaParams,
                              ctrl: SeriesControl = None, table: InvariantTable | None = None):
    """Orthogonally symmetrised type I density with kernel
    ``C_phi^{kappa,lambda}(½ Omega1, ½ Omega2) C_phi^{kappa,lambda}(U, I - U) / C_phi(I)``."""
    ctrl, table = _ctrl_table(ctrl, table)
    central = beta1_central_density(point, params)
    U = point.matrix()
    values = _symmetrised_values(U, np.eye(params.m) - U, params, ctrl, table)
    series, ratio = _double_series(params, ctrl, values, False, table, "beta1 symmetrised")
    log_etr = -0.5 * float(np.trace(params.omega1 + params.omega2))
    return _combine(central, log_etr, series, ratio, "beta1 symmetrised")


def beta2_symmetrised_density(point: SpectralPoint, params: BetaParams,
                              ctrl: SeriesControl = None, table: InvariantTable | None = None):
    """Orthogonally symmetrised type II density with kernel
    ``C_phi^{kappa,lambda}(½ Omega1, ½ Omega2) C_phi^{kappa,lambda}((I+F)^{-1}F, (I+F)^{-1}) / C_phi(I)``.

    The leading coefficient is read as ``(½(r+s))_phi``.
    """
    ctrl, table = _ctrl_table(ctrl, table)
    central = beta2_central_density(point, params)
    P = point.transformed_matrix(lambda g: g / (1 + g))
    values = _symmetrised_values(P, np.eye(params.m) - P, params, ctrl, table)
    series, ratio = _double_series(params, ctrl, values, False, table, "beta2 symmetrised")
    log_etr = -0.5 * float(np.trace(params.omega1 + params.omega2))
    return _combine(central, log_etr, series, ratio, "beta2 symmetrised")


# one-sided noncentral cases -------------------------------------------------------

def _require_zero(mat, name, what):
    if np.any(mat != 0):
        raise ValidationError(f"{what} requires {name} = 0")


def _nc(point, params, ctrl, central, omega, arg, b, max_parts, what):
    ctrl = ctrl or SeriesControl()
    X = 0.5 * omega @ arg
    a = (params.r + params.s) / 2
    val, ratio = hyper_1f1(a, b, X, ctrl, max_parts=max_parts)
    return _combine(central, -0.5 * float(np.trace(omega)), val, ratio, what)


def beta1_ncA_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None):
    """Type I(A): ``Omega1 = 0``; ``etr(-½ Omega2) 1F1(½(r+s); ½s; ½ Omega2 (I - U))``."""
    _require_zero(params.omega1, "omega1", "beta1 I(A)")
    central = beta1_central_density(point, params)
    arg = np.eye(params.m) - point.matrix()
    return _nc(point, params, ctrl, central, params.omega2, arg, params.s / 2, None, "beta1 I(A)")


def beta1_ncB_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None):
    """Type I(B): ``Omega2 = 0``; ``etr(-½ Omega1) 1F1(½(r+s); ½r; ½ Omega1 U)``.

    The lower parameter is ``½r``, which is what the doubly noncentral series
    reduces to when ``Omega2 = 0``.
    """
    _require_zero(params.omega2, "omega2", "beta1 I(B)")
    central = beta1_central_density(point, params)
    return _nc(point, params, ctrl, central, params.omega1, point.matrix(), params.r / 2,
               params.q, "beta1 I(B)")


def beta2_ncA_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None):
    """Type II(A): ``Omega1 = 0``; ``etr(-½ Omega2) 1F1(½(r+s); ½s; ½ Omega2 (I+F)^{-1})``."""
    _require_zero(params.omega1, "omega1", "beta2 II(A)")
    central = beta2_central_density(point, params)
    arg = np.eye(params.m) - point.transformed_matrix(lambda g: g / (1 + g))
    return _nc(point, params, ctrl, central, params.omega2, arg, params.s / 2, None, "beta2 II(A)")


def beta2_ncB_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None):
    """Type II(B): ``Omega2 = 0``; ``etr(-½ Omega1) 1F1(½(r+s); ½r; ½ Omega1 (I+F)^{-1} F)``."""
    _require_zero(params.omega2, "omega2", "beta2 II(B)")
    central = beta2_central_density(point, params)
    arg = point.transformed_matrix(lambda g: g / (1 + g))
    return _nc(point, params, ctrl, central, params.omega1, arg, params.r / 2,
               params.q, "beta2 II(B)")


# eigenvalue coordinates ------------------------------------------------------------

EVALUATORS = {
    ("beta1", "central"): lambda p, prm, ctrl: (beta1_central_density(p, prm), 0.0),
    ("beta2", "central"): lambda p, prm, ctrl: (beta2_central_density(p, prm), 0.0),
    ("beta1", "dnc"): beta1_dnc_density,
    ("beta2", "dnc"): beta2_dnc_density,
    ("beta1", "ncA"): beta1_ncA_density,
    ("beta1", "ncB"): beta1_ncB_density,
    ("beta2", "ncA"): beta2_ncA_density,
    ("beta2", "ncB"): beta2_ncB_density,
    ("beta1", "symmetrised"): beta1_symmetrised_density,
    ("beta2", "symmetrised"): beta2_symmetrised_density,
}


def eigen_joint_density(point: SpectralPoint, params: BetaParams, ctrl: SeriesControl = None,
                        which: str = "central") -> LogValue:
    """Joint density of ``(l, H1)`` w.r.t. ``prod dl_i (H1' dH1)``.

    Multiplies the selected density by ``2^{-q} prod l_i^{m-q} prod_{i<j} (l_i - l_j)``.
    """
    key = (point.kind, which)
    if key not in EVALUATORS:
        raise ValidationError(f"unknown density {which!r} for kind {point.kind!r}")
    l = point.eigenvalues
    m, q = params.m, params.q
    gaps = l[..., :-1] - l[..., 1:]
    if q > 1 and np.any(gaps < TIE_TOL):
        raise DegenerateSpectrumError("consecutive eigenvalues within 1e-10")
    dens, _ = EVALUATORS[key](point, params, ctrl)
    lg = -q * math.log(2) + (m - q) * np.log(l).sum(-1)
    if q > 1:
        lg = lg + np.log(_pair_diffs(l)).sum(-1)
    lg = np.broadcast_to(lg, np.shape(dens.log_magnitude))
    out = LogValue(dens.sign, dens.log_magnitude + lg)
    return LogValue(float(out.sign), float(out.log_magnitude)) if np.ndim(out.log_magnitude) == 0 \
        else out


def _pair_diffs(l):
    q = l.shape[-1]
    i, j = np.triu_indices(q, 1)
    return l[..., i] - l[..., j]
