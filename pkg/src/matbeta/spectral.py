"""Parameter and point types shared by the samplers and the density code."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumWarning, DomainError, ValidationError

__all__ = ["BetaParams", "SpectralPoint", "as_matrix"]

ORTHO_TOL = 1e-12
TIE_TOL = 1e-10


def as_matrix(value, m: int, name: str = "matrix") -> np.ndarray:
    """Coerce ``None`` (zero), a scalar (multiple of identity) or an array."""
    if value is None:
        return np.zeros((m, m))
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(m)
    if arr.shape != (m, m):
        raise ValidationError(f"{name} must be {m}x{m}, got shape {arr.shape}")
    return arr


def _check_psd(mat: np.ndarray, name: str):
    if not np.allclose(mat, mat.T, atol=1e-12 * max(1.0, np.abs(mat).max())):
        raise ValidationError(f"{name} must be symmetric")
    ev = np.linalg.eigvalsh(mat)
    if ev.size and ev[0] < -1e-10 * max(1.0, abs(ev[-1])):
        raise ValidationError(f"{name} must be positive semidefinite (min eigenvalue {ev[0]:.3g})")


@dataclass(frozen=True)
class BetaParams:
    """Parameters ``(m, q, r, s, Omega1, Omega2)`` of the beta distributions.

    ``q == m`` is the nonsingular case; ``q == r < m`` (integer ``r``) is the
    singular case where the numerator scatter matrix is rank deficient.
    """

    m: int
    q: int
    r: float
    s: float
    omega1: np.ndarray = field(default=None)
    omega2: np.ndarray = field(default=None)

    def __post_init__(self):
        m, q, r, s = self.m, self.q, self.r, self.s
        if int(m) != m or m < 1:
            raise ValidationError(f"m must be a positive integer, got {m}")
        if int(q) != q or q < 1:
            raise ValidationError(f"q must be a positive integer, got {q}")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "q", int(q))
        if not s > m - 1:
            raise ValidationError(f"s must exceed m - 1 = {m - 1}, got s = {s}")
        if q == m:
            if not r > m - 1:
                raise ValidationError(
                    f"nonsingular case q = m needs r > m - 1 = {m - 1}, got r = {r}"
                )
        elif q < m:
            if float(r) != q:
                raise ValidationError(
                    f"singular case requires q = r < m; got q = {q}, r = {r}"
                )
        else:
            raise ValidationError(f"q = {q} cannot exceed m = {m}")
        for name in ("omega1", "omega2"):
            mat = as_matrix(getattr(self, name), self.m, name)
            _check_psd(mat, name)
            mat = (mat + mat.T) / 2
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def singular(self) -> bool:
        return self.q < self.m

    def with_omegas(self, omega1=None, omega2=None) -> "BetaParams":
        return BetaParams(self.m, self.q, self.r, self.s, omega1, omega2)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "q": self.q,
            "r": self.r,
            "s": self.s,
            "omega1": self.omega1.tolist(),
            "omega2": self.omega2.tolist(),
        }


@dataclass(frozen=True)
class SpectralPoint:
    """Rank-``q`` point ``H1 diag(eigenvalues) H1'`` on the support.

    ``eigenvalues`` has shape ``(..., q)`` and ``frame`` has shape
    ``(..., m, q)``; leading axes broadcast, so a batch of rotated frames can
    share one spectrum.

    ``kind`` is ``"beta1"`` (eigenvalues in (0, 1)) or ``"beta2"``
    (eigenvalues positive).
    """

    eigenvalues: np.ndarray
    frame: np.ndarray
    kind: str = "beta1"

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        fr = np.asarray(self.frame, dtype=float)
        if ev.ndim == 0:
            ev = ev.reshape(1)
        if fr.ndim == 1:
            fr = fr.reshape(-1, 1)
        if self.kind not in ("beta1", "beta2"):
            raise ValidationError(f"kind must be 'beta1' or 'beta2', got {self.kind!r}")
        q = ev.shape[-1]
        if fr.shape[-1] != q:
            raise ValidationError(
                f"frame has {fr.shape[-1]} columns but there are {q} eigenvalues"
            )
        if fr.shape[-2] < q:
            raise ValidationError("frame must be m x q with q <= m")
        gram = np.swapaxes(fr, -1, -2) @ fr
        if np.max(np.abs(gram - np.eye(q))) > ORTHO_TOL:
            raise ValidationError("frame columns are not orthonormal")
        if np.any(np.diff(ev, axis=-1) > 0):
            raise ValidationError("eigenvalues must be in decreasing order")
        if self.kind == "beta1":
            if np.any(ev <= 0) or np.any(ev >= 1):
                raise DomainError("beta type I eigenvalues must lie in (0, 1)")
        elif np.any(ev <= 0):
            raise DomainError("beta type II eigenvalues must be positive")
        if q > 1 and np.any(-np.diff(ev, axis=-1) < TIE_TOL):
            warnings.warn("near-tied eigenvalues", DegenerateSpectrumWarning, stacklevel=3)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "frame", fr)

    @property
    def m(self) -> int:
        return self.frame.shape[-2]

    @property
    def q(self) -> int:
        return self.eigenvalues.shape[-1]

    def matrix(self) -> np.ndarray:
        """The ``m x m`` matrix ``H1 L H1'`` (batched)."""
        return (self.frame * self.eigenvalues[..., None, :]) @ np.swapaxes(self.frame, -1, -2)

    def transformed_matrix(self, fn) -> np.ndarray:
        """``H1 diag(fn(l)) H1'``, e.g. ``(I+F)^{-1} F`` for ``fn = g/(1+g)``."""
        vals = fn(self.eigenvalues)
        return (self.frame * vals[..., None, :]) @ np.swapaxes(self.frame, -1, -2)

    def rotated(self, H) -> "SpectralPoint":
        """The point ``H U H'`` for orthogonal ``H`` (shape ``(..., m, m)``)."""
        return SpectralPoint(self.eigenvalues, np.asarray(H) @ self.frame, self.kind)

    def to_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(), "frame": self.frame.tolist(),
                "kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict, kind: str | None = None) -> "SpectralPoint":
        return cls(np.asarray(d["eigenvalues"], float), np.asarray(d["frame"], float),
                   kind or d.get("kind", "beta1"))
