"""Invariant polynomials ``C_phi^{kappa,lambda}(X, Y)`` of two symmetric
matrices and the constants ``theta_phi^{kappa,lambda}``.

Each polynomial is stored on a basis of products of traces of words in
``X`` and ``Y`` (for example ``tr(X)^2 tr(XY)``). Words are identified up to
cyclic rotation and reversal, which is exact for symmetric arguments.

Coefficient tables come from two sources:

* a hand-transcribed fixture of the classical low-degree values
  (``k + l <= 2``), and
* a numerical construction from the kernel
  ``K(A, B; X, Y) = int_O(m) C_kappa(A H X H') C_lambda(B H Y H') dH``,
  which splits as ``sum_phi P_phi(A, B) P_phi(X, Y) / C_phi(I)``. The kernel
  is sampled at random positive semidefinite designs, fitted by least
  squares as a symmetric bilinear form in the trace basis, and the form is
  factored into its ``phi`` components using the ``(A, A)`` reduction
  ``P_phi(A, A) = theta_phi C_phi(A)``.

At ``m = 3`` the group average is computed by an exact cubature on SO(3),
so the fitted kernel carries no Monte Carlo noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .combinat import Partition, enumerate_partitions
from .errors import (
    MissingTableError,
    RankInstabilityError,
    ResidualTooLargeError,
    UnsupportedDegreeError,
    ValidationError,
)
from .randmat import haar_orthogonal, random_psd, so3_cubature, stream
from .zonal import power_sum_coefficients, power_traces, zonal_at_identity, zonal_eval_traces

__all__ = [
    "DEFAULT_MAX_DEGREE",
    "BiTraceMonomial",
    "InvariantComponent",
    "InvariantTable",
    "trace_words",
    "bitrace_basis",
    "word_traces",
    "invariant_eval",
    "bootstrap_invariants",
    "build_invariant_table",
    "theta_coeff",
    "phi_support",
    "load_fixture",
    "default_table",
]

DEFAULT_MAX_DEGREE = 3
SUPPORT_TOL = 1e-8
RANK_TOL = 1e-8


# trace words and the bi-trace basis ---------------------------------------

def _canonical(word: str) -> str:
    rev = word[::-1]
    n = len(word)
    return min(min(word[i:] + word[:i], rev[i:] + rev[:i]) for i in range(n))


@lru_cache(maxsize=None)
def trace_words(max_x: int, max_y: int) -> tuple[str, ...]:
    """Canonical words in ``X`` and ``Y`` with at most the given letter counts.

    Ordered by length, then lexicographically (``X``, ``Y``, ``XX``, ``XY``,
    ...).
    """
    found = set()
    for n in range(1, max_x + max_y + 1):
        for bits in range(2 ** n):
            w = "".join("Y" if bits >> i & 1 else "X" for i in range(n))
            if w.count("X") <= max_x and w.count("Y") <= max_y:
                found.add(_canonical(w))
    return tuple(sorted(found, key=lambda w: (len(w), w)))


@dataclass(frozen=True, order=True)
class BiTraceMonomial:
    """Product ``prod_w tr(w)^{e_w}`` over canonical words ``w``.

    ``words`` is a sorted tuple of ``(word, exponent)`` pairs; the empty
    product is the constant 1.
    """

    words: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for w, e in self.words:
            if not w or set(w) - {"X", "Y"} or _canonical(w) != w or e < 1:
                raise ValidationError(f"bad trace word factor ({w!r}, {e})")
        object.__setattr__(self, "words", tuple(sorted(self.words)))

    @classmethod
    def from_dict(cls, d: Mapping[str, int]) -> "BiTraceMonomial":
        return cls(tuple(sorted((_canonical(w), int(e)) for w, e in d.items())))

    def to_dict(self) -> dict[str, int]:
        return dict(self.words)

    @property
    def x_degree(self) -> int:
        return sum(w.count("X") * e for w, e in self.words)

    @property
    def y_degree(self) -> int:
        return sum(w.count("Y") * e for w, e in self.words)

    @property
    def power_partition(self) -> Partition:
        """Word lengths; the monomial equals ``p_mu(A)`` at ``X = Y = A``."""
        lengths = [len(w) for w, e in self.words for _ in range(e)]
        return Partition(sorted(lengths, reverse=True))

    def evaluate(self, traces: Mapping[str, np.ndarray]):
        out = 1.0
        for w, e in self.words:
            out = out * traces[w] ** e
        return out

    def __str__(self):
        if not self.words:
            return "1"
        return " ".join(f"tr({w})" + (f"^{e}" if e > 1 else "") for w, e in self.words)


@lru_cache(maxsize=None)
def bitrace_basis(k: int, l: int) -> tuple[BiTraceMonomial, ...]:
    """All bi-trace monomials of X-degree ``k`` and Y-degree ``l``."""
    if k < 0 or l < 0:
        raise ValidationError("degrees must be non-negative")
    words = [w for w in trace_words(k, l)]
    out = []

    def rec(i, kx, ly, acc):
        if kx == 0 and ly == 0:
            out.append(BiTraceMonomial(tuple(acc)))
            return
        if i == len(words):
            return
        w = words[i]
        a, b = w.count("X"), w.count("Y")
        e = 0
        while e * a <= kx and e * b <= ly:
            rec(i + 1, kx - e * a, ly - e * b, acc + ([(w, e)] if e else []))
            e += 1

    rec(0, k, l, [])
    return tuple(sorted(out))


def word_traces(X, Y, words) -> dict[str, np.ndarray]:
    """``tr(w(X, Y))`` for each word, batched over leading axes."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-2:] != Y.shape[-2:] or X.shape[-1] != X.shape[-2]:
        raise ValidationError(
            f"X and Y must be square of the same size, got {X.shape} and {Y.shape}"
        )
    base = {"X": X, "Y": Y}
    prods: dict[str, np.ndarray] = dict(base)

    def prod(w):
        if w not in prods:
            prods[w] = prod(w[:-1]) @ base[w[-1]]
        return prods[w]

    return {w: np.trace(prod(w), axis1=-2, axis2=-1) for w in words}


def _words_of(monomials) -> list[str]:
    return sorted({w for mono in monomials for w, _ in mono.words}, key=lambda w: (len(w), w))


# components -----------------------------------------------------------------

@dataclass(frozen=True)
class InvariantComponent:
    """One polynomial ``C_phi^{kappa,lambda}`` with its ``theta``."""

    kappa: Partition
    lam: Partition
    phi: Partition
    coeffs: Mapping[BiTraceMonomial, float]
    theta: float

    def __post_init__(self):
        for name in ("kappa", "lam", "phi"):
            object.__setattr__(self, name, Partition(getattr(self, name)))
        if self.phi.weight != self.kappa.weight + self.lam.weight:
            raise ValidationError(f"|phi| must equal |kappa| + |lambda|: {self}")
        k, l = self.kappa.weight, self.lam.weight
        for mono in self.coeffs:
            if (mono.x_degree, mono.y_degree) != (k, l):
                raise ValidationError(f"monomial {mono} does not have bidegree ({k}, {l})")
        object.__setattr__(self, "coeffs", MappingProxyType(dict(self.coeffs)))

    @property
    def bidegree(self) -> tuple[int, int]:
        return self.kappa.weight, self.lam.weight

    def norm(self) -> float:
        return float(np.sqrt(sum(c * c for c in self.coeffs.values())))

    def evaluate(self, X, Y, traces=None):
        if traces is None:
            traces = word_traces(X, Y, _words_of(self.coeffs))
        total = 0.0
        for mono, c in self.coeffs.items():
            total = total + c * mono.evaluate(traces)
        if np.ndim(total) == 0 and np.ndim(X) > 2:
            total = np.full(np.shape(X)[:-2], float(total))
        return total

    def __str__(self):
        terms = " + ".join(f"{c:.6g} {mono}" for mono, c in self.coeffs.items())
        return f"C_{self.phi}^{{{self.kappa},{self.lam}}} = {terms}  (theta = {self.theta:.6g})"


def invariant_eval(component: InvariantComponent, X, Y):
    """Value of the component at ``(X, Y)``; batched over leading axes.

    ``X`` and ``Y`` may be products such as ``Omega U``; only traces of words
    in them are used.
    """
    return component.evaluate(X, Y)


def theta_coeff(component: InvariantComponent, m: int | None = None) -> float:
    """``C_phi^{kappa,lambda}(I_m, I_m) / C_phi(I_m)``.

    ``m`` defaults to the number of parts of ``phi`` (at least 1); the value
    does not depend on ``m``.
    """
    m = max(len(component.phi), 1) if m is None else m
    if m < len(component.phi):
        raise ValidationError(f"m = {m} is smaller than the length of phi = {component.phi}")
    eye = np.eye(m)
    return float(component.evaluate(eye, eye)) / zonal_at_identity(component.phi, m)


# the kernel bootstrap ---------------------------------------------------------

def _kernel_block(kappa, lam, m, n_designs, rng, exact):
    k, l = kappa.weight, lam.weight
    A, B, X, Y = (random_psd(m, rng, n_designs) for _ in range(4))
    H = haar_orthogonal(m, rng, n_designs)
    if exact:
        R, W = so3_cubature(2 * (k + l))
        G = H[:, None] @ R[None]
    else:
        n_rot = 256
        G = haar_orthogonal(m, rng, n_designs * n_rot).reshape(n_designs, n_rot, m, m)
        W = np.full(n_rot, 1.0 / n_rot)
    Gt = np.swapaxes(G, -1, -2)
    left = A[:, None] @ G @ X[:, None] @ Gt
    right = B[:, None] @ G @ Y[:, None] @ Gt
    fk = zonal_eval_traces(kappa, left, power_traces(left, k)) if k else 1.0
    fl = zonal_eval_traces(lam, right, power_traces(right, l)) if l else 1.0
    K = np.sum(W * fk * fl, axis=-1)
    return A, B, X, Y, K


def _basis_matrix(basis, X, Y):
    traces = word_traces(X, Y, _words_of(basis))
    cols = [np.broadcast_to(mono.evaluate(traces), X.shape[:-2]) for mono in basis]
    return np.stack(cols, axis=-1)


def _fit_kernel(kappa, lam, basis, m, n_designs, seed, exact, block):
    pieces = []
    for i in range(0, n_designs, block):
        nb = min(block, n_designs - i)
        pieces.append(_kernel_block(kappa, lam, m, nb, stream(seed, i // block), exact))
    A, B, X, Y, K = (np.concatenate(p) for p in zip(*pieces))
    u = _basis_matrix(basis, A, B)
    v = _basis_matrix(basis, X, Y)
    n = len(basis)
    iu = np.triu_indices(n)
    feats = np.stack(
        [u[:, i] * v[:, j] + (u[:, j] * v[:, i] if i != j else 0.0) for i, j in zip(*iu)],
        axis=1,
    )
    # column scaling keeps the normal equations well conditioned
    scale = np.linalg.norm(feats, axis=0)
    scale[scale == 0] = 1.0
    c, *_ = np.linalg.lstsq(feats / scale, K, rcond=None)
    c = c / scale
    resid = float(np.linalg.norm(feats @ c - K) / max(np.linalg.norm(K), 1e-300))
    M = np.zeros((n, n))
    M[iu] = c
    M = M + M.T - np.diag(np.diag(M))
    return M, resid


def _numerical_rank(M, tol):
    ev = np.linalg.eigvalsh(M)
    top = np.max(np.abs(ev)) if ev.size else 0.0
    return int(np.sum(ev > tol * top)) if top > 0 else 0


def _power_vector(phi: Partition, mus: list[Partition]) -> np.ndarray:
    coefs = power_sum_coefficients(phi)
    return np.array([float(coefs.get(mu, 0)) for mu in mus])


def bootstrap_invariants(
    k: int,
    l: int,
    mc_samples: int = 200_000,
    seed: int = 0,
    *,
    m: int | None = None,
    residual_tol: float | None = None,
    rank_tol: float | None = None,
    max_degree: int = DEFAULT_MAX_DEGREE,
    return_diagnostics: bool = False,
):
    """Construct every ``C_phi^{kappa,lambda}`` with ``|kappa| = k``, ``|lambda| = l``.

    Parameters
    ----------
    k, l : int
        Degrees in ``X`` and ``Y``.
    mc_samples : int
        Total number of group elements used across both seed streams.
    seed : int
        Two disjoint streams are derived from it; the numerical rank of the
        fitted kernel must agree between them.
    m : int, optional
        Dimension of the random designs. Defaults to 3 (exact SO(3)
        cubature) for ``k + l <= 3``. Above that the trace words are no
        longer independent at ``m = 3``, so ``m = k + l`` is used with plain
        Haar Monte Carlo (noisy); pairs with an empty partition are then
        zonal polynomials and are written down directly.
    residual_tol, rank_tol : float, optional
        Relative fit residual allowed and relative eigenvalue threshold for
        the numerical rank. Defaults depend on whether the exact cubature is
        used.
    max_degree : int
        Refuse ``k + l`` above this.

    Returns
    -------
    list of InvariantComponent, one per ``(kappa, lambda)`` pair and member
    ``phi``. With ``return_diagnostics`` a dict of fit diagnostics is also
    returned.

    Raises
    ------
    RankInstabilityError, ResidualTooLargeError, UnsupportedDegreeError
    """
    if k < 0 or l < 0:
        raise ValidationError("degrees must be non-negative")
    if k + l > max_degree:
        raise UnsupportedDegreeError(f"k + l = {k + l} exceeds the degree cap {max_degree}")
    if k + l == 0:
        comp = InvariantComponent((), (), (), {BiTraceMonomial(): 1.0}, 1.0)
        return ([comp], {}) if return_diagnostics else [comp]

    basis = list(bitrace_basis(k, l))
    n_feat = len(basis) * (len(basis) + 1) // 2
    mus = enumerate_partitions(k + l)
    Rmat = np.zeros((len(mus), len(basis)))
    for b, mono in enumerate(basis):
        Rmat[mus.index(mono.power_partition), b] = 1.0

    parent = np.random.SeedSequence(seed)
    children = parent.spawn(2)
    out, diags = [], {}
    for kappa in enumerate_partitions(k) if k else [Partition(())]:
        for lam in enumerate_partitions(l) if l else [Partition(())]:
            m_pair = (3 if k + l <= 3 else k + l) if m is None else m
            if m_pair != 3 and not (kappa and lam):
                comp = _zonal_component(kappa, lam)
                diags[(kappa, lam)] = {"direct": True}
                out.append(comp)
                continue
            exact = m_pair == 3
            r_tol = (1e-6 if exact else 0.2) if residual_tol is None else residual_tol
            k_tol = (RANK_TOL if exact else 2e-2) if rank_tol is None else rank_tol
            per_design = len(so3_cubature(2 * (k + l))[1]) if exact else 256
            n_designs = max(mc_samples // (2 * per_design), 10 * n_feat)
            fits = [
                _fit_kernel(kappa, lam, basis, m_pair, n_designs, ch, exact, block=128)
                for ch in children
            ]
            ranks = [_numerical_rank(M, k_tol) for M, _ in fits]
            resid = max(r for _, r in fits)
            if ranks[0] != ranks[1]:
                raise RankInstabilityError(
                    f"kernel rank differs between seed streams for {kappa},{lam}: {ranks}"
                )
            if resid > r_tol:
                raise ResidualTooLargeError(
                    f"kernel fit residual {resid:.3g} exceeds {r_tol:g} for {kappa},{lam}"
                )
            M = (fits[0][0] + fits[1][0]) / 2
            comps, info = _split_kernel(kappa, lam, basis, M, ranks[0], Rmat, mus, m_pair, r_tol)
            info.update(fit_residual=resid, rank=ranks[0], n_designs=2 * n_designs, m=m_pair)
            diags[(kappa, lam)] = info
            out.extend(comps)
    return (out, diags) if return_diagnostics else out


def _zonal_component(kappa, lam) -> InvariantComponent:
    """``C_kappa(X)`` (or ``C_lambda(Y)``) from its power-sum form; theta = 1."""
    part, letter = (kappa, "X") if kappa else (lam, "Y")
    coeffs = {}
    for mu, c in power_sum_coefficients(part).items():
        counts: dict = {}
        for j in mu:
            counts[letter * j] = counts.get(letter * j, 0) + 1
        coeffs[BiTraceMonomial(tuple(counts.items()))] = float(c)
    return InvariantComponent(kappa, lam, part, coeffs, 1.0)


def _split_kernel(kappa, lam, basis, M, rank, Rmat, mus, m, tol):
    ev, V = np.linalg.eigh(M)
    order = np.argsort(ev)[::-1]
    Vr = V[:, order[:rank]]
    T = Rmat @ Vr
    members, cols = [], []
    residuals = {}
    for psi in enumerate_partitions(kappa.weight + lam.weight):
        if len(psi) > m:
            continue
        z = _power_vector(psi, mus)
        y, *_ = np.linalg.lstsq(T, z, rcond=None)
        res = float(np.linalg.norm(T @ y - z) / np.linalg.norm(z))
        residuals[psi] = res
        if res < 1e-6:
            members.append(psi)
            cols.append(Vr @ y)
    if len(members) != rank:
        raise ResidualTooLargeError(
            f"(A, A) reduction matched {len(members)} partitions but the kernel rank is {rank} "
            f"for {kappa},{lam}"
        )
    U = np.stack(cols, axis=1)
    Up = np.linalg.pinv(U)
    D = Up @ M @ Up.T
    off = D - np.diag(np.diag(D))
    off_rel = float(np.max(np.abs(off)) / np.max(np.abs(np.diag(D)))) if rank > 1 else 0.0
    if off_rel > max(tol, 1e-6):
        raise ResidualTooLargeError(
            f"kernel is not diagonal in the matched components (off-diagonal {off_rel:.3g})"
        )
    comps = []
    for i, phi in enumerate(members):
        if D[i, i] <= 0:
            raise ResidualTooLargeError(f"non-positive kernel weight for phi = {phi}")
        theta = math.sqrt(D[i, i] * zonal_at_identity(phi, m))
        c = theta * U[:, i]
        big = np.max(np.abs(c))
        coeffs = {mono: float(v) for mono, v in zip(basis, c) if abs(v) > 1e-12 * big}
        comps.append(InvariantComponent(kappa, lam, phi, coeffs, theta))
    return comps, {"reduction_residuals": residuals, "offdiag": off_rel}


# tables ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantTable:
    """All components up to total degree ``max_degree``, keyed by ``(kappa, lambda)``."""

    max_degree: int
    entries: Mapping[tuple[Partition, Partition], tuple[InvariantComponent, ...]]
    source: str = ""

    @classmethod
    def from_components(cls, comps, source: str = "", max_degree: int | None = None):
        entries: dict = {}
        for c in comps:
            entries.setdefault((c.kappa, c.lam), []).append(c)
        if max_degree is None:
            max_degree = max(k.weight + l.weight for k, l in entries) if entries else 0
        frozen = {key: tuple(sorted(v, key=lambda c: c.phi, reverse=True))
                  for key, v in entries.items()}
        return cls(max_degree, MappingProxyType(frozen), source)

    def components(self, kappa, lam) -> tuple[InvariantComponent, ...]:
        kappa, lam = Partition(kappa), Partition(lam)
        if kappa.weight + lam.weight > self.max_degree:
            raise UnsupportedDegreeError(
                f"bidegree ({kappa.weight}, {lam.weight}) exceeds table degree {self.max_degree}"
            )
        try:
            return self.entries[(kappa, lam)]
        except KeyError:
            raise MissingTableError(f"no invariant table entry for ({kappa}, {lam})") from None

    def __iter__(self):
        for comps in self.entries.values():
            yield from comps

    def words(self, max_total: int | None = None) -> list[str]:
        top = self.max_degree if max_total is None else max_total
        monos = [mono for c in self if c.phi.weight <= top for mono in c.coeffs]
        return _words_of(monos)

    def evaluate_all(self, X, Y, max_total: int | None = None) -> dict:
        """Values of every component with ``k + l <= max_total`` at ``(X, Y)``,
        sharing the word traces. Keys are ``(kappa, lambda, phi)``."""
        top = self.max_degree if max_total is None else max_total
        if top > self.max_degree:
            raise UnsupportedDegreeError(
                f"degree {top} exceeds table degree {self.max_degree}"
            )
        traces = word_traces(X, Y, self.words(top))
        return {
            (c.kappa, c.lam, c.phi): c.evaluate(X, Y, traces)
            for c in self
            if c.phi.weight <= top
        }

    def to_records(self) -> list[dict]:
        recs = []
        for c in self:
            for mono, v in c.coeffs.items():
                recs.append(
                    {
                        "kappa": list(c.kappa),
                        "lambda": list(c.lam),
                        "phi": list(c.phi),
                        "basis_word_exponents": mono.to_dict(),
                        "coefficient": v,
                        "theta": c.theta,
                    }
                )
        return recs

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=1)

    @classmethod
    def from_records(cls, records, source: str = "") -> "InvariantTable":
        groups: dict = {}
        for rec in records:
            key = (Partition(rec["kappa"]), Partition(rec["lambda"]), Partition(rec["phi"]))
            g = groups.setdefault(key, {"theta": float(rec["theta"]), "coeffs": {}})
            mono = BiTraceMonomial.from_dict(rec["basis_word_exponents"])
            g["coeffs"][mono] = g["coeffs"].get(mono, 0.0) + float(rec["coefficient"])
        comps = [
            InvariantComponent(kap, lam, phi, g["coeffs"], g["theta"])
            for (kap, lam, phi), g in groups.items()
        ]
        return cls.from_components(comps, source)

    @classmethod
    def from_json(cls, text: str, source: str = "") -> "InvariantTable":
        """Accepts a bare record list or a document with a ``records`` key."""
        data = json.loads(text)
        if isinstance(data, dict):
            data = data["records"]
        return cls.from_records(data, source)


def build_invariant_table(
    max_degree: int = DEFAULT_MAX_DEGREE, mc_samples: int = 200_000, seed: int = 0, **kw
) -> InvariantTable:
    """Bootstrap every bidegree with ``k + l <= max_degree``."""
    comps = []
    for total in range(max_degree + 1):
        for k in range(total, -1, -1):
            comps.extend(
                bootstrap_invariants(k, total - k, mc_samples, seed, max_degree=max_degree, **kw)
            )
    return InvariantTable.from_components(comps, f"bootstrap(seed={seed})", max_degree)


def _read_data(name: str) -> str:
    return resources.files("matbeta").joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def load_fixture() -> InvariantTable:
    """Transcribed classical tables for ``k + l <= 2``."""
    return InvariantTable.from_json(_read_data("invariant_fixture.json"), "fixture")


@lru_cache(maxsize=None)
def default_table() -> InvariantTable:
    """Shipped bootstrap table (``k + l <= 3``, seed 0, 2e5 samples per pair)."""
    return InvariantTable.from_json(_read_data("invariant_bootstrap.json"), "bootstrap")


def phi_support(kappa, lam, table: InvariantTable | None = None) -> list[Partition]:
    """Partitions ``phi`` with a nonzero ``C_phi^{kappa,lambda}`` in the table."""
    table = default_table() if table is None else table
    comps = table.components(kappa, lam)
    if not comps:
        return []
    top = max(c.norm() for c in comps)
    return [c.phi for c in comps if c.norm() > SUPPORT_TOL * top]
