"""Zonal polynomials ``C_kappa`` of a symmetric matrix argument.

Coefficients on the monomial symmetric basis come from James' recurrence
(eigenfunctions of the Laplace-Beltrami type operator), computed in exact
rational arithmetic and normalized so that ``sum_{kappa |- k} C_kappa(X) =
(tr X)^k``. Evaluation routes through the eigenvalues of the argument.

A second representation on power sums ``p_mu = prod_i tr(X^{mu_i})`` is
derived from the first; it evaluates ``C_kappa`` at arbitrary square
matrices (e.g. products ``A H X H'``) without an eigendecomposition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .combinat import Partition, dominates, enumerate_partitions
from .errors import MissingTableError, ResourceError, ValidationError

__all__ = [
    "DEFAULT_K_MAX",
    "DEFAULT_CAP",
    "ZonalTable",
    "build_zonal_table",
    "zonal_eval",
    "zonal_eval_all",
    "zonal_eval_matrix",
    "zonal_eval_traces",
    "zonal_at_identity",
    "zonal_identity_check",
    "monomial_eval",
    "power_sum_coefficients",
    "power_traces",
    "dump_tables",
    "load_tables",
]

DEFAULT_K_MAX = 8
DEFAULT_CAP = 12


@dataclass(frozen=True)
class ZonalTable:
    """Zonal polynomials of one degree on the monomial symmetric basis.

    ``rows[kappa][lam]`` is the coefficient of ``M_lam`` in ``C_kappa``.
    When ``max_parts`` is set, only partitions with at most that many parts
    are stored; the omitted rows and columns vanish on arguments of that
    dimension.
    """

    degree: int
    rows: Mapping[Partition, Mapping[Partition, float]]
    max_parts: int | None = None
    exact: Mapping[Partition, Mapping[Partition, Fraction]] = field(
        default=None, repr=False, compare=False
    )

    @property
    def partitions(self) -> list[Partition]:
        return list(self.rows)

    def coefficient(self, kappa, lam) -> float:
        return self.rows[Partition(kappa)].get(Partition(lam), 0.0)


def _rho(p: Partition) -> int:
    return sum(part * (part - i) for i, part in enumerate(p, start=1))


@lru_cache(maxsize=None)
def _exact_rows(k: int, max_parts: int) -> dict:
    parts = enumerate_partitions(k, max_parts)
    rho = {p: _rho(p) for p in parts}
    unnormalized = {}
    for a, kappa in enumerate(parts):
        row = {kappa: Fraction(1)}
        for lam in parts[a + 1:]:
            if not dominates(kappa, lam):
                continue
            total = Fraction(0)
            for j in range(1, len(lam)):
                for i in range(j):
                    for t in range(1, lam[j] + 1):
                        mu = list(lam)
                        mu[i] += t
                        mu[j] -= t
                        mu = Partition(sorted((x for x in mu if x), reverse=True))
                        c = row.get(mu)
                        if c:
                            total += ((lam[i] + t) - (lam[j] - t)) * c
            if total:
                row[lam] = total / (rho[kappa] - rho[lam])
        unnormalized[kappa] = row

    # (tr X)^k = sum_lam k!/prod(lam_i!) M_lam fixes the scale of each row;
    # the system is unitriangular in lexicographic order.
    scale = {}
    for lam in parts:
        target = Fraction(math.factorial(k), math.prod(math.factorial(x) for x in lam))
        acc = sum(
            (scale[kap] * unnormalized[kap].get(lam, 0) for kap in scale), Fraction(0)
        )
        scale[lam] = target - acc
    return {
        kappa: {lam: scale[kappa] * c for lam, c in unnormalized[kappa].items()}
        for kappa in parts
    }


def _table(k: int, max_parts: int | None) -> ZonalTable:
    mp = max(k, 1) if max_parts is None else max(1, min(max_parts, max(k, 1)))
    exact = _exact_rows(k, mp)
    rows = {
        kappa: MappingProxyType({lam: float(c) for lam, c in row.items()})
        for kappa, row in exact.items()
    }
    return ZonalTable(
        degree=k,
        rows=MappingProxyType(rows),
        max_parts=None if max_parts is None else mp,
        exact=MappingProxyType(exact),
    )


def build_zonal_table(
    k_max: int = DEFAULT_K_MAX, max_parts: int | None = None, cap: int = DEFAULT_CAP
) -> list[ZonalTable]:
    """Tables for all degrees ``0..k_max``.

    Parameters
    ----------
    k_max : int
        Highest degree.
    max_parts : int, optional
        Keep only partitions with at most this many parts (the dimension of
        the arguments the tables will be evaluated at). Restricting makes
        high degrees cheap.
    cap : int
        Largest degree allowed; protects against accidental huge requests.
    """
    if k_max < 0:
        raise ValidationError(f"k_max must be non-negative, got {k_max}")
    if k_max > cap:
        raise ResourceError(f"zonal table degree {k_max} exceeds cap {cap}")
    return [_table(k, max_parts) for k in range(k_max + 1)]


@lru_cache(maxsize=None)
def _distinct_perms(exps: tuple[int, ...]) -> np.ndarray:
    out = []

    def rec(prefix, counts):
        if len(prefix) == len(exps):
            out.append(prefix)
            return
        for v in sorted(counts):
            if counts[v]:
                counts[v] -= 1
                rec(prefix + (v,), counts)
                counts[v] += 1

    counts = {}
    for e in exps:
        counts[e] = counts.get(e, 0) + 1
    rec((), counts)
    return np.array(out, dtype=float).reshape(len(out), len(exps))


def monomial_eval(lam, x) -> np.ndarray | float:
    """Monomial symmetric function ``M_lam`` at the points ``x[..., :]``."""
    lam = Partition(lam)
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    if len(lam) > m:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    perms = _distinct_perms(tuple(lam) + (0,) * (m - len(lam)))
    vals = np.prod(x[..., None, :] ** perms, axis=-1).sum(axis=-1)
    return vals if x.ndim > 1 else float(vals)


@lru_cache(maxsize=None)
def _float_block(k: int, m: int):
    """Coefficient matrix (n_kappa, n_perm) and exponent array for degree k."""
    table = _table(k, m)
    kappas = table.partitions
    exps, owners = [], []
    lams = []
    for lam in enumerate_partitions(k, m):
        perms = _distinct_perms(tuple(lam) + (0,) * (m - len(lam)))
        exps.append(perms)
        owners.extend([len(lams)] * len(perms))
        lams.append(lam)
    exps = np.concatenate(exps, axis=0) if exps else np.zeros((1, m))
    coef = np.zeros((len(kappas), len(lams)))
    for a, kappa in enumerate(kappas):
        for b, lam in enumerate(lams):
            coef[a, b] = table.rows[kappa].get(lam, 0.0)
    owner = np.array(owners, dtype=int)
    expand = np.zeros((len(lams), len(owner)))
    expand[owner, np.arange(len(owner))] = 1.0
    return kappas, exps, coef @ expand


def zonal_eval_all(k: int, eigenvalues) -> dict[Partition, np.ndarray | float]:
    """All ``C_kappa``, ``kappa |- k`` with at most ``m`` parts, at once.

    ``eigenvalues`` has shape ``(..., m)``.
    """
    x = np.asarray(eigenvalues, dtype=float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    m = x.shape[-1]
    if k == 0:
        ones = np.ones(x.shape[:-1])
        return {Partition(()): 1.0 if scalar else ones}
    kappas, exps, coef = _float_block(k, m)
    mono = np.prod(x[..., None, :] ** exps, axis=-1)
    vals = mono @ coef.T
    out = {}
    for a, kappa in enumerate(kappas):
        out[kappa] = float(vals[0, a]) if scalar else vals[..., a]
    return out


def zonal_eval(kappa, eigenvalues, table: ZonalTable | None = None):
    """``C_kappa`` at the matrix with the given eigenvalues.

    Parameters
    ----------
    kappa : Partition or tuple
    eigenvalues : array_like, shape (..., m)
    table : ZonalTable, optional
        Use this table instead of the cached exact coefficients. Raises
        :class:`MissingTableError` if it does not contain ``kappa``.

    Returns zero when ``kappa`` has more than ``m`` parts.
    """
    kappa = Partition(kappa)
    x = np.asarray(eigenvalues, dtype=float)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ValidationError("eigenvalues must have length m >= 1")
    m = x.shape[-1]
    if table is not None:
        if table.degree != kappa.weight or kappa not in table.rows:
            if len(kappa) > m and table.degree == kappa.weight:
                return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
            raise MissingTableError(f"no zonal table row for {kappa}")
        if table.max_parts is not None and table.max_parts < min(m, kappa.weight):
            raise MissingTableError(
                f"table keeps {table.max_parts} parts, argument has dimension {m}"
            )
        total = 0.0
        for lam, c in table.rows[kappa].items():
            total = total + c * monomial_eval(lam, x)
        return total
    if len(kappa) > m:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    return zonal_eval_all(kappa.weight, x)[kappa]


def _eigvals(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if np.allclose(X, np.swapaxes(X, -1, -2)):
        return np.linalg.eigvalsh(X)
    return np.linalg.eigvals(X).real


def zonal_eval_matrix(kappa, X):
    """``C_kappa(X)`` through the eigenvalues of ``X`` (``(..., m, m)``)."""
    return zonal_eval(kappa, _eigvals(X))


def zonal_at_identity(kappa, m: int) -> float:
    """``C_kappa(I_m)``."""
    return float(zonal_eval(kappa, np.ones(m)))


def zonal_identity_check(k: int, X) -> float:
    """Relative residual ``|sum_kappa C_kappa(X) - (tr X)^k| / |tr X|^k``."""
    X = np.asarray(X, dtype=float)
    if k == 0:
        return 0.0
    ev = _eigvals(X)
    total = sum(zonal_eval_all(k, ev).values())
    ref = float(np.trace(X)) ** k
    return float(abs(total - ref) / abs(ref))


# power-sum representation ------------------------------------------------

def _assignments(mu: tuple[int, ...], lam: tuple[int, ...]) -> int:
    """Coefficient of ``x^lam`` in ``p_mu`` (maps of parts of mu onto bins)."""

    @lru_cache(maxsize=None)
    def rec(i, remaining):
        if i == len(mu):
            return 1 if not any(remaining) else 0
        total = 0
        for j, cap in enumerate(remaining):
            if mu[i] <= cap:
                nxt = list(remaining)
                nxt[j] -= mu[i]
                total += rec(i + 1, tuple(nxt))
        return total

    return rec(0, tuple(lam))


def _solve_exact(matrix: list[list[Fraction]], rhs: list[list[Fraction]]):
    """Solve ``matrix @ X = rhs`` exactly by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [list(matrix[i]) + list(rhs[i]) for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@lru_cache(maxsize=None)
def _monomial_to_power(k: int) -> dict:
    parts = enumerate_partitions(k, max(k, 1))
    # p_mu = sum_lam L[mu][lam] M_lam  ->  M = L^{-1} p
    L = [[Fraction(_assignments(tuple(mu), tuple(lam))) for lam in parts] for mu in parts]
    eye = [[Fraction(int(i == j)) for j in range(len(parts))] for i in range(len(parts))]
    inv = _solve_exact(L, eye)
    return {
        lam: {mu: inv[a][b] for b, mu in enumerate(parts) if inv[a][b] != 0}
        for a, lam in enumerate(parts)
    }


@lru_cache(maxsize=None)
def power_sum_coefficients(kappa) -> dict[Partition, Fraction]:
    """Exact expansion ``C_kappa = sum_mu a_mu prod_i tr(X^{mu_i})``.

    The expansion does not depend on the dimension of the argument.
    """
    kappa = Partition(kappa)
    k = kappa.weight
    if k == 0:
        return {Partition(()): Fraction(1)}
    rows = _exact_rows(k, max(k, 1))[kappa]
    m2p = _monomial_to_power(k)
    out: dict[Partition, Fraction] = {}
    for lam, c in rows.items():
        for mu, d in m2p[lam].items():
            out[mu] = out.get(mu, Fraction(0)) + c * d
    return {mu: v for mu, v in out.items() if v != 0}


def power_traces(X, k: int) -> list:
    """``[tr X^0, tr X^1, ..., tr X^k]`` for square (batched) ``X``."""
    X = np.asarray(X, dtype=float)
    out = [np.full(X.shape[:-2], float(X.shape[-1])) if X.ndim > 2 else float(X.shape[-1])]
    P = None
    for _ in range(k):
        P = X if P is None else P @ X
        out.append(np.trace(P, axis1=-2, axis2=-1))
    return out


def zonal_eval_traces(kappa, X, traces=None):
    """``C_kappa(X)`` from power sums of ``X``; ``X`` need not be symmetric."""
    kappa = Partition(kappa)
    if traces is None:
        traces = power_traces(X, kappa.weight)
    total = 0.0
    for mu, c in power_sum_coefficients(kappa).items():
        term = float(c)
        for part in mu:
            term = term * traces[part]
        total = total + term
    return total


# JSON -------------------------------------------------------------------

def dump_tables(tables: list[ZonalTable]) -> str:
    """Serialize tables as records ``{degree, partition, monomial_exponents, coefficient}``."""
    records = []
    for t in tables:
        for kappa, row in t.rows.items():
            for lam, c in row.items():
                records.append(
                    {
                        "degree": t.degree,
                        "partition": list(kappa),
                        "monomial_exponents": list(lam),
                        "coefficient": c,
                    }
                )
    return json.dumps(records, indent=1)


def load_tables(text: str) -> list[ZonalTable]:
    records = json.loads(text)
    by_degree: dict[int, dict] = {}
    for rec in records:
        d = by_degree.setdefault(int(rec["degree"]), {})
        row = d.setdefault(Partition(rec["partition"]), {})
        row[Partition(rec["monomial_exponents"])] = float(rec["coefficient"])
    out = []
    for k in sorted(by_degree):
        rows = {kap: MappingProxyType(r) for kap, r in by_degree[k].items()}
        out.append(ZonalTable(degree=k, rows=MappingProxyType(rows)))
    return out
