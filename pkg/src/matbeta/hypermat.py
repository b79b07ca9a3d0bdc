"""Hypergeometric functions of one symmetric matrix argument.

Truncated zonal series

    1F1(a; b; X) = sum_k sum_{kappa |- k} (a)_kappa / (b)_kappa C_kappa(X) / k!

accumulated shell by shell (fixed total degree) in descending
lexicographic partition order. The truncation point is fixed by the caller;
``tail_ratio`` (outermost shell over the running total) is returned so the
caller can judge convergence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .combinat import enumerate_partitions, gen_pochhammer_ln
from .errors import PoleError, TruncationWarning, ValidationError
from .zonal import _eigvals, zonal_eval_all

__all__ = ["SeriesControl", "hyper_1f1", "hyper_0f0", "tail_ratio_of"]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every zonal-type series.

    Attributes
    ----------
    k_max : int
        Highest total degree kept.
    tail_tol : float
        A :class:`TruncationWarning` is issued when the tail ratio exceeds
        this value.
    abs_floor : float
        Guard against dividing by a vanishing partial sum.
    """

    k_max: int = 3
    tail_tol: float = 1e-8
    abs_floor: float = 1e-300

    def __post_init__(self):
        if self.k_max < 0:
            raise ValidationError(f"k_max must be >= 0, got {self.k_max}")
        if self.tail_tol < 0 or self.abs_floor < 0:
            raise ValidationError("tail_tol and abs_floor must be non-negative")


def tail_ratio_of(last_shell, total, ctrl: SeriesControl):
    ratio = np.abs(last_shell) / np.maximum(np.abs(total), ctrl.abs_floor)
    return float(ratio) if np.ndim(ratio) == 0 else ratio


def _warn_tail(ratio, ctrl, what):
    if np.any(np.asarray(ratio) > ctrl.tail_tol):
        warnings.warn(
            f"{what}: tail ratio {np.max(ratio):.3g} exceeds {ctrl.tail_tol:g}",
            TruncationWarning,
            stacklevel=3,
        )


def _series(eigenvalues, ctrl, coef, max_parts, what):
    x = np.asarray(eigenvalues, dtype=float)
    m = x.shape[-1]
    parts_cap = m if max_parts is None else min(m, max_parts)
    total = np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    shell = total
    for k in range(ctrl.k_max + 1):
        zon = zonal_eval_all(k, x)
        shell = 0.0
        for kappa in enumerate_partitions(k, parts_cap):
            c = coef(kappa)
            if c is None:
                continue
            sign, lg = c
            shell = shell + sign * math.exp(lg - math.lgamma(k + 1)) * zon[kappa]
        total = total + shell
    ratio = tail_ratio_of(shell, total, ctrl)
    _warn_tail(ratio, ctrl, what)
    return total, ratio


def hyper_1f1(a: float, b: float, X=None, ctrl: SeriesControl | None = None, *,
              eigenvalues=None, max_parts: int | None = None):
    """Truncated ``1F1(a; b; X)``.

    Parameters
    ----------
    a, b : float
    X : array_like, shape (..., m, m)
        Symmetric argument (or a product similar to one). Alternatively pass
        ``eigenvalues`` of shape ``(..., m)``.
    ctrl : SeriesControl
    max_parts : int, optional
        Skip partitions with more parts; valid when the argument has rank at
        most ``max_parts`` (those zonal polynomials vanish).

    Returns
    -------
    value, tail_ratio
    """
    ctrl = ctrl or SeriesControl()
    x = _eigvals(X) if eigenvalues is None else np.asarray(eigenvalues, dtype=float)

    def coef(kappa):
        num = gen_pochhammer_ln(a, kappa)
        den = gen_pochhammer_ln(b, kappa)
        if den.sign == 0:
            raise PoleError(f"(b)_kappa vanishes for b={b}, kappa={kappa}")
        if num.sign == 0:
            return None
        return num.sign * den.sign, num.log_magnitude - den.log_magnitude

    return _series(x, ctrl, coef, max_parts, "1F1")


def hyper_0f0(X=None, ctrl: SeriesControl | None = None, *, eigenvalues=None):
    """Truncated ``0F0(X) = etr(X)``; returns ``(value, tail_ratio)``."""
    ctrl = ctrl or SeriesControl()
    x = _eigvals(X) if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    return _series(x, ctrl, lambda kappa: (1.0, 0.0), None, "0F0")
