"""Exception and warning classes shared across the package.

Errors split into two families so front ends can map them to exit codes:
``ValidationError`` for inputs that violate a documented precondition and
``NumericalError`` for failures that arise while computing.
"""


class MatbetaError(Exception):
    """Base class of all package errors."""


class ValidationError(MatbetaError, ValueError):
    """An input violates a precondition (parameter ranges, shapes, ...)."""


class DomainError(ValidationError):
    """A point lies outside the support of the density."""


class NumericalError(MatbetaError, ArithmeticError):
    """A computation failed for numerical reasons."""


class PoleError(NumericalError):
    """A gamma function or Pochhammer symbol hit a pole."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResourceError(NumericalError):
    """A requested table exceeds the configured size cap."""


class MissingTableError(NumericalError):
    """A coefficient table does not cover the requested partition."""


class UnsupportedDegreeError(NumericalError):
    """A series degree exceeds what the available tables support."""


class RankInstabilityError(NumericalError):
    """Numerical rank of a bootstrapped kernel differs between seeds."""


class ResidualTooLargeError(NumericalError):
    """A least-squares fit left a residual above tolerance."""


class DegenerateSpectrumError(NumericalError):
    """Eigenvalues are too close for the spectral Jacobian."""


class TruncationWarning(RuntimeWarning):
    """A truncated series has not converged (large tail ratio or sign flip)."""


class DegenerateSpectrumWarning(RuntimeWarning):
    """Near-tied eigenvalues; the eigenvector frame is not unique."""
