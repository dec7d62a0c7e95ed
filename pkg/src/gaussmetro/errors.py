"""Exception types raised across the package."""


class GaussMetroError(Exception):
    """Base class for all package errors."""


class InvalidParams(GaussMetroError, ValueError):
    pass


class NonPhysicalState(GaussMetroError, ValueError):
    """Covariance matrix violates the uncertainty relation det(sigma) >= 1/4."""


class NonPhysicalOutput(GaussMetroError, ValueError):
    """A channel produced an unphysical covariance matrix."""


class QuadratureFailure(GaussMetroError, RuntimeError):
    pass


class PurityDerivativeSingular(GaussMetroError, ArithmeticError):
    """Purity derivative is non-zero for a state that is numerically pure."""


class DomainError(GaussMetroError, ValueError):
    pass


class DegenerateBound(GaussMetroError, ValueError):
    """Noise factor 1 + 2N - 2|M|cos(xi) is not positive."""


class TruncationLeak(GaussMetroError, RuntimeError):
    """Fock-space truncation discards more population than allowed."""


class StepFailure(GaussMetroError, RuntimeError):
    """Time-stepping could not reach the requested accuracy."""
