"""Random matrices: Haar orthogonal draws, (pseudo-)Wishart scatter matrices
and the beta type I / II constructions built from them.

Random streams are Philox (counter based). Stream ``i`` of seed ``s`` is the
``i``-th spawned child of ``SeedSequence(s)``, so block-parallel loops give
identical results for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ValidationError
from .spectral import BetaParams, SpectralPoint, as_matrix

__all__ = [
    "make_rng",
    "stream",
    "map_blocks",
    "haar_orthogonal",
    "so3_cubature",
    "random_psd",
    "ScatterMatrix",
    "wishart_sample",
    "pseudo_wishart_sample",
    "eigdecomp_rank_q",
    "beta1_sample",
    "beta2_sample",
]

COND_CAP = 1e12
RANK_TOL = 1e-10
BLOCK_SIZE = 20_000


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def stream(seed, index: int) -> np.random.Generator:
    """Independent generator number ``index`` derived from ``seed``.

    ``seed`` is an int or a :class:`numpy.random.SeedSequence`; the result is
    the same as the ``index``-th child of ``SeedSequence(seed).spawn``.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + (int(index),))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def map_blocks(fn, n: int, seed: int, *, block_size: int = BLOCK_SIZE, workers: int = 1):
    """Run ``fn(rng, n_block)`` over fixed-size blocks of ``n`` draws.

    Returns the list of per-block results in block order. Block ``i`` always
    uses ``stream(seed, i)``, so the output does not depend on ``workers``.
    """
    sizes = [block_size] * (n // block_size)
    if n % block_size:
        sizes.append(n % block_size)

    def run(i):
        return fn(stream(seed, i), sizes[i])

    if workers <= 1 or len(sizes) <= 1:
        return [run(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def haar_orthogonal(m: int, rng=None, size=None) -> np.ndarray:
    """Haar-distributed orthogonal matrices.

    QR of a Gaussian matrix with the columns of Q multiplied by the signs of
    ``diag(R)``, which makes the law exactly Haar on O(m).
    """
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    rng = make_rng(rng)
    shape = (m, m) if size is None else (size, m, m)
    Z = rng.standard_normal(shape)
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return Q * d[..., None, :]


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(b):
    c, s = np.cos(b), np.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@lru_cache(maxsize=None)
def so3_cubature(band_limit: int):
    """Rotations and weights integrating SO(3) functions of band limit ``L``
    exactly against normalized Haar measure.

    ZYZ Euler grid: ``L+1`` equispaced angles for alpha and gamma and
    ``ceil((L+1)/2)`` Gauss-Legendre nodes in ``cos(beta)``. Polynomials of
    degree ``d`` in the entries of the rotation have band limit ``d``.
    """
    n = band_limit + 1
    nb = (band_limit + 2) // 2
    x, w = np.polynomial.legendre.leggauss(nb)
    angles = 2 * np.pi * np.arange(n) / n
    rots, weights = [], []
    for a in angles:
        for b, wb in zip(np.arccos(x), w):
            for g in angles:
                rots.append(_rz(a) @ _ry(b) @ _rz(g))
                weights.append(wb / (2.0 * n * n))
    R, W = np.array(rots), np.array(weights)
    R.setflags(write=False)
    W.setflags(write=False)
    return R, W


def random_psd(m: int, rng=None, size=None, dof: int | None = None) -> np.ndarray:
    """Random positive semidefinite matrices ``Z Z' / dof`` with ``Z`` m x dof."""
    rng = make_rng(rng)
    dof = m if dof is None else dof
    shape = (m, dof) if size is None else (size, m, dof)
    Z = rng.standard_normal(shape)
    return Z @ np.swapaxes(Z, -1, -2) / dof


@dataclass(frozen=True)
class ScatterMatrix:
    """Sampled ``Z'Z`` with ``Z`` Gaussian (identity covariance)."""

    matrix: np.ndarray
    dof: int
    noncentrality: np.ndarray
    kind: str


def _psd_sqrt(omega: np.ndarray) -> np.ndarray:
    ev, V = np.linalg.eigh(omega)
    return (V * np.sqrt(np.clip(ev, 0, None))) @ V.T


def _mean_rows(omega: np.ndarray, n_rows: int) -> np.ndarray:
    """``n_rows x m`` mean matrix ``M`` with ``M'M = omega``."""
    m = omega.shape[0]
    M = np.zeros((n_rows, m))
    if not np.any(omega):
        return M
    if n_rows >= m:
        M[:m] = _psd_sqrt(omega)
        return M
    ev, V = np.linalg.eigh(omega)
    ev, V = ev[::-1], V[:, ::-1]
    if np.any(ev[n_rows:] > RANK_TOL * max(ev[0], 1.0)):
        raise ValidationError(
            f"noncentrality of rank > {n_rows} is impossible with {n_rows} Gaussian rows"
        )
    M[:] = (V[:, :n_rows] * np.sqrt(np.clip(ev[:n_rows], 0, None))).T
    return M


def _gram(m, n_rows, omega, rng, size):
    omega = as_matrix(omega, m, "omega")
    rng = make_rng(rng)
    M = _mean_rows(omega, n_rows)
    shape = (n_rows, m) if size is None else (size, n_rows, m)
    Z = rng.standard_normal(shape) + M
    G = np.swapaxes(Z, -1, -2) @ Z
    return (G + np.swapaxes(G, -1, -2)) / 2, omega


def _check_int_dof(dof, name):
    if float(dof) != int(dof) or dof < 1:
        raise ValidationError(f"{name} must be a positive integer for sampling, got {dof}")
    return int(dof)


def wishart_sample(m: int, s: int, omega=None, rng=None, size=None) -> ScatterMatrix:
    """Noncentral Wishart ``W_m(s, I, Omega)``, ``s >= m``.

    The mean matrix stacks the symmetric square root of ``Omega`` over zero
    rows.
    """
    s = _check_int_dof(s, "s")
    if s < m:
        raise ValidationError(f"Wishart needs s >= m, got s = {s}, m = {m}")
    G, omega = _gram(m, s, omega, rng, size)
    return ScatterMatrix(G, s, omega, "wishart")


def pseudo_wishart_sample(m: int, r: int, omega=None, rng=None, size=None) -> ScatterMatrix:
    """Noncentral pseudo-Wishart ``PW_m(r, I, Omega)``, ``1 <= r < m``; rank r."""
    r = _check_int_dof(r, "r")
    if r >= m:
        raise ValidationError(f"pseudo-Wishart needs r < m, got r = {r}, m = {m}")
    G, omega = _gram(m, r, omega, rng, size)
    return ScatterMatrix(G, r, omega, "pseudo_wishart")


def eigdecomp_rank_q(matrix, q: int, kind: str | None = None) -> SpectralPoint:
    """Top-``q`` spectral representation ``H1 L H1'`` of a PSD matrix.

    Eigenvalues come out in decreasing order; each eigenvector is signed so
    that its largest-magnitude entry is positive. ``kind`` defaults to
    ``"beta1"`` when all retained eigenvalues lie in (0, 1), else
    ``"beta2"``.
    """
    X = np.asarray(matrix, dtype=float)
    X = (X + np.swapaxes(X, -1, -2)) / 2
    m = X.shape[-1]
    if not 1 <= q <= m:
        raise ValidationError(f"q must be in 1..{m}, got {q}")
    ev, V = np.linalg.eigh(X)
    ev = ev[..., ::-1][..., :q]
    V = V[..., ::-1][..., :q]
    scale = np.maximum(np.abs(ev[..., :1]), 1e-300)
    if np.any(ev[..., -1] <= RANK_TOL * scale[..., 0]):
        raise ValidationError(f"matrix has numerical rank below q = {q}")
    idx = np.argmax(np.abs(V), axis=-2)
    signs = np.sign(np.take_along_axis(V, idx[..., None, :], axis=-2))
    V = V * signs
    if kind is None:
        kind = "beta1" if np.all((ev > 0) & (ev < 1)) else "beta2"
    return SpectralPoint(ev, V, kind)


def _draw_ab(params: BetaParams, rng, size):
    rng = make_rng(rng)
    m = params.m
    s = _check_int_dof(params.s, "s")
    r = _check_int_dof(params.r, "r")
    if params.singular:
        A = pseudo_wishart_sample(m, r, params.omega1, rng, size).matrix
    else:
        A = wishart_sample(m, r, params.omega1, rng, size).matrix
    B = wishart_sample(m, s, params.omega2, rng, size).matrix
    return A, B


def _inv_sqrt(S):
    ev, V = np.linalg.eigh(S)
    if np.any(ev[..., 0] <= 0) or np.any(ev[..., -1] / ev[..., 0] > COND_CAP):
        raise NumericalError("scatter matrix is numerically singular (condition > 1e12)")
    return (V / np.sqrt(ev)[..., None, :]) @ np.swapaxes(V, -1, -2)


def beta1_sample(params: BetaParams, rng=None, size=None) -> SpectralPoint:
    """Draw ``U = (A+B)^{-1/2} A (A+B)^{-1/2}`` with symmetric square roots."""
    A, B = _draw_ab(params, rng, size)
    W = _inv_sqrt(A + B)
    U = W @ A @ W
    return eigdecomp_rank_q(U, params.q, kind="beta1")


def beta2_sample(params: BetaParams, rng=None, size=None) -> SpectralPoint:
    """Draw ``F = B^{-1/2} A B^{-1/2}`` with the symmetric square root of B."""
    A, B = _draw_ab(params, rng, size)
    W = _inv_sqrt(B)
    F = W @ A @ W
    return eigdecomp_rank_q(F, params.q, kind="beta2")
