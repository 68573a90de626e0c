"""Exception types raised across the package."""


class SplitRangeError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(SplitRangeError, ValueError):
    """Raised when a vector or operator has the wrong dimension."""


class SpecError(SplitRangeError, ValueError):
    """Raised for a malformed operator or pair specification.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending field, e.g. ``"A.operand.radius"``.
    """

    def __init__(self, message, field=None):
        self.field = field
        self.detail = message
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NonMonotoneError(SpecError):
    """Raised when a linear map has an indefinite symmetric part."""


class WindowExhaustedError(SplitRangeError, RuntimeError):
    """Raised when a grid search ends on the boundary of its search window."""


class NonFiniteIterateError(SplitRangeError, FloatingPointError):
    """Raised when an iteration produces NaN or infinite entries."""


class EmptySampleError(SplitRangeError, ValueError):
    """Raised when a sampler or point cloud has no points."""


class UnsupportedSetError(SplitRangeError, TypeError):
    """Raised when an exact-only set operation receives a sampled set."""
