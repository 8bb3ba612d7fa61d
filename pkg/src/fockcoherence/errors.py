"""Exception types raised across the package."""


class CoherenceError(Exception):
    """Base class for all package errors."""


class InvalidArgument(CoherenceError, ValueError):
    pass


class CapacityExceeded(CoherenceError):
    """A truncation cutoff or dense dimension would exceed its configured cap."""


class SeriesDivergence(CoherenceError, ValueError):
    pass


class InvalidState(CoherenceError, ValueError):
    pass


class UndefinedCorrelation(CoherenceError, ZeroDivisionError):
    pass


class UndefinedGradient(CoherenceError, ValueError):
    pass


class Infeasible(CoherenceError, ValueError):
    pass


class SolverFailure(CoherenceError, RuntimeError):
    """Raised when an optimizer hits its iteration cap.

    The partial state is attached as ``diagnostics`` so callers can inspect it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UsageError(CoherenceError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
