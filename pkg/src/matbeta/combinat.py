"""Integer partitions, generalized Pochhammer symbols and the multivariate
gamma function.

Every series in the package is indexed by partitions and weighted by ratios
of generalized Pochhammer symbols, so the log-space arithmetic lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np
from scipy.special import gammaln, gammasgn

from .errors import PoleError, ValidationError

__all__ = [
    "Partition",
    "LogValue",
    "enumerate_partitions",
    "partition_count",
    "gen_pochhammer",
    "gen_pochhammer_ln",
    "mv_gamma_ln",
    "dominates",
]

LOG_ZERO = -np.inf


class Partition(tuple):
    """Nonincreasing tuple of positive integers.

    ``Partition(())`` is the unique partition of 0. Partitions compare as
    tuples, so ``sorted(..., reverse=True)`` gives descending lexicographic
    order.
    """

    __slots__ = ()

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise ValidationError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValidationError(f"partition parts must be nonincreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def parts(self) -> tuple[int, ...]:
        return tuple(self)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def __repr__(self):
        return f"Partition({tuple(self)!r})"

    def __str__(self):
        return "(" + ",".join(str(p) for p in self) + ")"


@dataclass(frozen=True)
class LogValue:
    """Sign and natural log of the magnitude of a real number.

    Fields may be numpy arrays of matching shape. Zero is represented by
    ``sign == 0`` and ``log_magnitude == -inf``.
    """

    sign: float | np.ndarray
    log_magnitude: float | np.ndarray

    @classmethod
    def from_value(cls, x) -> "LogValue":
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lg = np.log(np.abs(x))
        sign = np.sign(x)
        if x.ndim == 0:
            return cls(float(sign), float(lg))
        return cls(sign, lg)

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(0.0, LOG_ZERO)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(1.0, 0.0)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if not isinstance(other, LogValue):
            other = LogValue.from_value(other)
        sign = self.sign * other.sign
        lg = np.where(sign == 0, LOG_ZERO, self.log_magnitude + other.log_magnitude)
        if np.ndim(lg) == 0:
            return LogValue(float(sign), float(lg))
        return LogValue(sign, lg)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if not isinstance(other, LogValue):
            other = LogValue.from_value(other)
        if np.any(np.asarray(other.sign) == 0):
            raise ZeroDivisionError("division by a zero LogValue")
        return self * LogValue(other.sign, -np.asarray(other.log_magnitude))

    @property
    def value(self):
        with np.errstate(over="ignore"):
            v = self.sign * np.exp(self.log_magnitude)
        return float(v) if np.ndim(v) == 0 else v

    def __float__(self):
        return float(self.value)


def enumerate_partitions(k: int, max_parts: int | None = None) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_parts`` parts.

    Returned in descending lexicographic order, e.g. ``(3), (2,1), (1,1,1)``.
    """
    if k < 0:
        raise ValidationError(f"k must be non-negative, got {k}")
    if max_parts is None:
        max_parts = max(k, 1)
    if max_parts < 1:
        raise ValidationError(f"max_parts must be positive, got {max_parts}")
    return list(_partitions_cached(int(k), int(max_parts)))


@lru_cache(maxsize=None)
def _partitions_cached(k: int, max_parts: int) -> tuple[Partition, ...]:
    return tuple(Partition(p) for p in _gen(k, k, max_parts))


def _gen(k: int, largest: int, parts_left: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    if parts_left == 0:
        return
    for first in range(min(k, largest), 0, -1):
        for rest in _gen(k - first, first, parts_left - 1):
            yield (first,) + rest


def partition_count(k: int) -> int:
    """Number of partitions of ``k`` (Euler's pentagonal recurrence)."""
    p = [1] + [0] * k
    for n in range(1, k + 1):
        total, j = 0, 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > n:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[n - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            j += 1
        p[n] = total
    return p[k]


def dominates(kappa: Partition, lam: Partition) -> bool:
    """True when ``kappa >= lam`` in dominance order (same weight assumed)."""
    s1 = s2 = 0
    for i in range(max(len(kappa), len(lam))):
        s1 += kappa[i] if i < len(kappa) else 0
        s2 += lam[i] if i < len(lam) else 0
        if s1 < s2:
            return False
    return True


def gen_pochhammer(a: float, kappa: Partition) -> float:
    """Generalized Pochhammer symbol ``prod_i (a - (i-1)/2)_{kappa_i}``."""
    out = 1.0
    for i, part in enumerate(kappa):
        base = a - i / 2.0
        for j in range(part):
            out *= base + j
    return out


def gen_pochhammer_ln(a: float, kappa: Partition) -> LogValue:
    """Log-space version of :func:`gen_pochhammer`."""
    sign, lg = 1.0, 0.0
    for i, part in enumerate(kappa):
        base = a - i / 2.0
        for j in range(part):
            f = base + j
            if f == 0.0:
                return LogValue.zero()
            if f < 0:
                sign = -sign
            lg += math.log(abs(f))
    return LogValue(sign, lg)


def _is_gamma_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def mv_gamma_ln(m: int, a: float) -> LogValue:
    """Log of the multivariate gamma function

    ``Gamma_m[a] = pi^{m(m-1)/4} prod_{i=1}^m Gamma(a - (i-1)/2)``.

    Raises
    ------
    PoleError
        If some factor ``Gamma(a - (i-1)/2)`` is at a pole; ``index`` holds
        the 1-based factor index.
    """
    if m < 1:
        raise ValidationError(f"m must be a positive integer, got {m}")
    sign = 1.0
    lg = m * (m - 1) / 4.0 * math.log(math.pi)
    for i in range(1, m + 1):
        x = a - (i - 1) / 2.0
        if _is_gamma_pole(x):
            raise PoleError(
                f"Gamma_{m}[{a}] has a pole: factor i={i} is Gamma({x})", index=i
            )
        sign *= float(gammasgn(x))
        lg += float(gammaln(x))
    return LogValue(sign, lg)
