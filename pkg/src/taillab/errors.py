"""Exception types shared across the library."""


class TaillabError(Exception):
    """Base class for all library errors."""


class GridError(TaillabError):
    """Invalid grid or grid mismatch between sampled functions."""


class ResolutionError(TaillabError):
    """A grid does not resolve the structure it is asked to represent."""


class SingularDenominatorError(TaillabError):
    """The local inversion denominator crosses zero inside the window."""

    def __init__(self, radius, message=None):
        self.radius = radius
        super().__init__(message or f"denominator crosses zero near r = {radius:.6g}")


class ConditioningError(TaillabError):
    """A linear system is singular or too ill-conditioned to trust."""


class TruncationError(TaillabError):
    """Compact support assumption violated: function touches the grid edge."""


class DomainError(TaillabError):
    """Input value outside the valid domain of an operation."""


class AccuracyError(TaillabError):
    """A quadrature or series failed its internal convergence check."""


class InsufficientOscillationsError(TaillabError):
    """Too few extrema in the fit window to estimate an oscillation."""


class NoisyProfileError(TaillabError):
    """Extrema do not alternate in sign; profile too noisy to fit."""


class NonPowerLawError(TaillabError):
    """Profile is not consistent with a single power law."""


class SolverError(TaillabError):
    """An iterative solver failed to converge."""
