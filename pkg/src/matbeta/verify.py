"""Monte Carlo and quadrature checks of the density formulas.

Every Monte Carlo loop runs over fixed-size blocks, block ``i`` drawing from
``randmat.stream(seed, i)``; block summaries are combined in block order, so
results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, stats

from .betadist import EVALUATORS, eigen_joint_density
from .combinat import mv_gamma_ln
from .errors import TruncationWarning, ValidationError
from .hypermat import SeriesControl
from .invariant import InvariantComponent, InvariantTable, default_table
from .randmat import BLOCK_SIZE, haar_orthogonal, map_blocks, random_psd, stream
from .spectral import BetaParams, SpectralPoint
from .zonal import zonal_at_identity, zonal_identity_check

__all__ = [
    "MCResult",
    "symmetrise_mc",
    "lemma4_check",
    "scalar_dnc_oracle",
    "marginal_eigen_density",
    "stiefel_volume_ln",
    "normalization_check",
    "run_suite",
]


@dataclass(frozen=True)
class MCResult:
    """Monte Carlo (or quadrature) estimate with its standard error."""

    estimate: float
    std_error: float
    n_samples: int
    seed: int | None

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValidationError(f"std_error must be non-negative, got {self.std_error}")

    def z_score(self, target: float = 0.0, floor: float = 0.0) -> float:
        dev = abs(self.estimate - target)
        if dev <= floor:
            return 0.0
        return dev / self.std_error if self.std_error > 0 else math.inf

    def within(self, target: float = 0.0, n_se: float = 3.0, floor: float = 0.0) -> bool:
        return abs(self.estimate - target) <= n_se * self.std_error + floor

    def to_dict(self) -> dict:
        return asdict(self)


def _summaries(values: np.ndarray):
    values = np.asarray(values, dtype=float).ravel()
    mean = float(values.mean())
    return len(values), mean, float(((values - mean) ** 2).sum())


def _merge(a, b):
    """Chan et al. update of two ``(n, mean, M2)`` summaries."""
    na, ma, m2a = a
    nb, mb, m2b = b
    tot = na + nb
    delta = mb - ma
    return tot, ma + delta * nb / tot, m2a + m2b + delta * delta * na * nb / tot


def _reduce(blocks, seed) -> MCResult:
    """Combine per-block ``(n, mean, M2)`` by a pairwise tree in block order."""
    level = list(blocks)
    if not level:
        raise ValidationError("no Monte Carlo blocks to reduce")
    while len(level) > 1:
        nxt = [_merge(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    n, mean, m2 = level[0]
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return MCResult(mean, se, n, seed)


def _eval(evaluator, point, params, ctrl):
    out = evaluator(point, params, ctrl)
    lv = out[0] if isinstance(out, tuple) else out
    return np.asarray(lv.value, dtype=float)


def symmetrise_mc(evaluator, point: SpectralPoint, params: BetaParams, n: int = 200_000,
                  seed: int = 0, *, ctrl: SeriesControl | None = None, workers: int = 1,
                  block_size: int = BLOCK_SIZE) -> MCResult:
    """Haar average of ``evaluator`` over the rotated points ``H U H'``.

    ``evaluator(point, params, ctrl)`` returns a LogValue or
    ``(LogValue, tail_ratio)`` and must accept a batch of frames.
    """
    m = params.m

    def block(rng, size):
        H = haar_orthogonal(m, rng, size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            vals = _eval(evaluator, point.rotated(H), params, ctrl)
        return _summaries(np.broadcast_to(vals, (size,)))

    return _reduce(map_blocks(block, n, seed, block_size=block_size, workers=workers), seed)


def lemma4_check(component: InvariantComponent, A, B, X, Y, n: int = 200_000, seed: int = 0,
                 *, workers: int = 1, block_size: int = BLOCK_SIZE) -> MCResult:
    """MC estimate of ``int P(A H'XH, B H'YH) dH - P(A,B) P(X,Y) / (theta C_phi(I))``.

    ``P`` is the component polynomial and ``theta`` its stored constant.
    """
    A, B, X, Y = (np.asarray(M, dtype=float) for M in (A, B, X, Y))
    m = A.shape[-1]
    if any(M.shape != (m, m) for M in (B, X, Y)):
        raise ValidationError("A, B, X, Y must all be m x m")
    rhs = float(component.evaluate(A, B)) * float(component.evaluate(X, Y)) / (
        component.theta * zonal_at_identity(component.phi, m))

    def block(rng, size):
        H = haar_orthogonal(m, rng, size)
        Ht = np.swapaxes(H, -1, -2)
        vals = component.evaluate(A @ Ht @ X @ H, B @ Ht @ Y @ H)
        return _summaries(np.broadcast_to(vals, (size,)) - rhs)

    return _reduce(map_blocks(block, n, seed, block_size=block_size, workers=workers), seed)


def scalar_dnc_oracle(r: float, s: float, omega1: float, omega2: float, u, j_max: int = 60,
                      *, return_tail: bool = False):
    """Scalar doubly noncentral beta density as a double Poisson mixture

    ``sum_{j,k <= j_max} Pois(j; omega1/2) Pois(k; omega2/2) Beta(u; r/2 + j, s/2 + k)``.

    With ``return_tail`` also returns the neglected Poisson mass (an upper
    bound on the relative truncation error when the Beta densities are
    bounded at ``u``). A :class:`TruncationWarning` is issued when that mass
    exceeds 1e-12.
    """
    u = np.asarray(u, dtype=float)
    j = np.arange(j_max + 1)
    w1 = stats.poisson.pmf(j, omega1 / 2)
    w2 = stats.poisson.pmf(j, omega2 / 2)
    dens = stats.beta.pdf(u[..., None, None], r / 2 + j[:, None], s / 2 + j[None, :])
    val = np.sum(w1[:, None] * w2[None, :] * dens, axis=(-2, -1))
    tail = 1.0 - w1.sum() * w2.sum()
    if tail > 1e-12:
        warnings.warn(f"Poisson mixture tail mass {tail:.3g}", TruncationWarning, stacklevel=2)
    val = float(val) if val.ndim == 0 else val
    return (val, tail) if return_tail else val


def stiefel_volume_ln(q: int, m: int) -> float:
    """Log of ``int_{V_{q,m}} (H1' dH1) = 2^q pi^{qm/2} / Gamma_q[m/2]``."""
    g = mv_gamma_ln(q, m / 2)
    return q * math.log(2) + q * m / 2 * math.log(math.pi) - g.log_magnitude


def _random_frames(m, q, rng, size):
    return haar_orthogonal(m, rng, size)[..., :q]


def marginal_eigen_density(params: BetaParams, ctrl: SeriesControl | None = None,
                           l_grid=None, n_frames: int = 2000, seed: int = 0, *,
                           kind: str = "beta1", which: str = "central",
                           normalize: str = "self") -> np.ndarray:
    """Marginal density of the eigenvalues with the frame integrated out.

    The joint density of ``(l, H1)`` is averaged over ``n_frames`` uniform
    frames (the same frames at every grid point).

    Parameters
    ----------
    l_grid : array_like
        Increasing 1-D grid inside the support.
    normalize : {"self", "volume"}
        ``"self"`` divides by the trapezoid integral over the grid, so no
        frame-volume constant is needed. ``"volume"`` multiplies the frame
        average by the Stiefel volume instead (absolute density).

    Returns
    -------
    ndarray
        Shape ``(n_grid,)`` for ``q = 1``; for ``q = 2`` an
        ``(n_grid, n_grid)`` array with entry ``[i, j]`` the density at
        ``l1 = grid[i] > l2 = grid[j]`` (zero when ``i <= j``).
    """
    q, m = params.q, params.m
    if q > 2:
        raise ValidationError("marginal_eigen_density supports q <= 2")
    grid = np.asarray(l_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValidationError("l_grid must be a strictly increasing 1-D array")
    frames = _random_frames(m, q, stream(seed, 0), n_frames)

    def frame_avg(ev):
        pt = SpectralPoint(np.broadcast_to(ev, (n_frames, q)), frames, kind)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            lv = eigen_joint_density(pt, params, ctrl, which)
        return float(np.mean(lv.value))

    if q == 1:
        dens = np.array([frame_avg(np.array([x])) for x in grid])
        norm = np.trapezoid(dens, grid)
    else:
        n = len(grid)
        dens = np.zeros((n, n))
        for i in range(n):
            for j in range(i):
                dens[i, j] = frame_avg(np.array([grid[i], grid[j]]))
        norm = np.trapezoid(np.trapezoid(dens, grid, axis=1), grid)
    if normalize == "self":
        return dens / norm
    if normalize == "volume":
        return dens * math.exp(stiefel_volume_ln(q, m))
    raise ValidationError(f"normalize must be 'self' or 'volume', got {normalize!r}")


def normalization_check(params: BetaParams, ctrl: SeriesControl | None = None,
                        method: str = "mc", n: int = 200_000, seed: int = 0, *,
                        kind: str = "beta1", which: str = "central",
                        workers: int = 1) -> MCResult:
    """Estimate the total mass of a density.

    ``quadrature_1d`` (``m = q = 1``) integrates with adaptive quadrature;
    the reported error is the quadrature error estimate. ``mc`` (``m <= 2``)
    samples ordered eigenvalues uniformly (type II through ``g = u/(1-u)``)
    and frames uniformly on the Stiefel manifold, whose total volume is
    ``2^q pi^{qm/2} / Gamma_q[m/2]`` in the ``(H1' dH1)`` convention.

    For truncated noncentral series the estimate also carries the
    truncation bias; it is not included in ``std_error``.
    """
    key = (kind, which)
    if key not in EVALUATORS:
        raise ValidationError(f"unknown density {which!r} for kind {kind!r}")
    m, q = params.m, params.q
    if method == "quadrature_1d":
        if m != 1:
            raise ValidationError("quadrature_1d requires m = q = 1")

        def f(x):
            pt = SpectralPoint([x], [[1.0]], kind)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                return float(EVALUATORS[key](pt, params, ctrl)[0].value)

        upper = 1.0 if kind == "beta1" else np.inf
        val, err = integrate.quad(f, 0.0, upper, epsabs=1e-13, epsrel=1e-13, limit=200)
        return MCResult(val, abs(err), 0, None)
    if method != "mc":
        raise ValidationError(f"method must be 'quadrature_1d' or 'mc', got {method!r}")
    if m > 2:
        raise ValidationError("mc normalization supports m <= 2")
    log_vol = stiefel_volume_ln(q, m)

    def block(rng, size):
        u = -np.sort(-rng.uniform(size=(size, q)), axis=-1)
        w = np.full(size, 1.0 / math.factorial(q))
        if kind == "beta2":
            w = w * np.prod((1 - u) ** -2.0, axis=-1)
            u = u / (1 - u)
        frames = _random_frames(m, q, rng, size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pt = SpectralPoint(u, frames, kind)
            lv = eigen_joint_density(pt, params, ctrl, which)
        return _summaries(np.exp(lv.log_magnitude + log_vol) * lv.sign * w)

    return _reduce(map_blocks(block, n, seed, workers=workers), seed)


# suite --------------------------------------------------------------------------------

def _record(check, params, res: MCResult, passed, seed):
    return {
        "check": check,
        "params": params,
        "estimate": res.estimate,
        "std_error": res.std_error,
        "pass": bool(passed),
        "seed": seed,
    }


def run_suite(seed: int = 0, n: int = 50_000, *, table: InvariantTable | None = None,
              workers: int = 1) -> list[dict]:
    """Run the standard checks and return one JSON-ready record per check.

    Includes the group-integral identity for every table component with
    ``k + l <= 2`` (at ``m = 3``), a symmetrisation check at ``m = 2``, the
    scalar reduction against the Poisson mixture, and normalization and
    zonal-identity checks.
    """
    table = default_table() if table is None else table
    recs = []
    rng = stream(seed, 10_000)
    A, B, X, Y = (random_psd(3, rng) for _ in range(4))
    for comp in table:
        if comp.phi.weight == 0 or comp.phi.weight > 2:
            continue
        res = lemma4_check(comp, A, B, X, Y, n, seed, workers=workers)
        scale = abs(float(comp.evaluate(A @ X, B @ Y)))
        recs.append(_record(
            "lemma4",
            {"kappa": list(comp.kappa), "lambda": list(comp.lam), "phi": list(comp.phi),
             "m": 3, "source": table.source},
            res, res.within(0.0, 3.0, 1e-10 * scale), seed))

    params = BetaParams(2, 2, 3, 4, np.diag([1.0, 0.4]), np.array([[0.6, 0.2], [0.2, 0.3]]))
    point = SpectralPoint([0.7, 0.2], np.array([[0.8, -0.6], [0.6, 0.8]]), "beta1")
    ctrl = SeriesControl(k_max=3)
    res = symmetrise_mc(EVALUATORS[("beta1", "dnc")], point, params, n, seed, ctrl=ctrl,
                        workers=workers)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        target = EVALUATORS[("beta1", "symmetrised")](point, params, ctrl)[0].value
    recs.append(_record("symmetrisation_beta1", {"m": 2, "q": 2, "k_max": 3, "target": target},
                        MCResult(res.estimate - target, res.std_error, n, seed),
                        res.within(target), seed))

    p1 = BetaParams(1, 1, 3, 5, 1.2, 0.7)
    grid = np.linspace(0.05, 0.95, 10)
    pts = SpectralPoint(grid[:, None], np.ones((10, 1, 1)), "beta1")
    val = EVALUATORS[("beta1", "dnc")](pts, p1, SeriesControl(k_max=40))[0].value
    ref = scalar_dnc_oracle(3, 5, 1.2, 0.7, grid)
    err = float(np.max(np.abs(val / ref - 1)))
    recs.append(_record("scalar_reduction", {"r": 3, "s": 5, "omega1": 1.2, "omega2": 0.7},
                        MCResult(err, 0.0, 10, None), err < 1e-6, None))

    res = normalization_check(BetaParams(1, 1, 2, 4), method="quadrature_1d")
    recs.append(_record("normalization_m1", {"m": 1, "q": 1, "r": 2, "s": 4}, res,
                        abs(res.estimate - 1) < 1e-10, None))
    res = normalization_check(BetaParams(2, 1, 1, 3), n=n, seed=seed, workers=workers)
    recs.append(_record("normalization_m2_q1", {"m": 2, "q": 1, "r": 1, "s": 3}, res,
                        abs(res.estimate - 1) < 0.01 + 3 * res.std_error, seed))

    worst = max(zonal_identity_check(k, random_psd(d, rng)) for k in range(1, 7)
                for d in range(1, 6))
    recs.append(_record("zonal_identity", {"k_max": 6, "m": "1..5"},
                        MCResult(worst, 0.0, 30, seed), worst < 1e-9, seed))
    return recs
