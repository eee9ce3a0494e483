"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation-type errors give 2,
convergence errors 3 and resource guards 4.
"""


class MagicSpectraError(Exception):
    """Base class for library errors."""


class ValidationError(MagicSpectraError, ValueError):
    """Input failed a structural or numerical precondition."""


class DimensionError(ValidationError):
    """Tensor extents do not match."""


class ParameterError(ValidationError):
    """A model parameter lies outside its supported domain."""


class DegenerateStateError(MagicSpectraError):
    """The state is zero or its dominant eigenspace is ambiguous."""


class ConvergenceError(MagicSpectraError):
    """An iterative solver did not reach the requested tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DecompositionError(MagicSpectraError):
    """A dense factorization failed or produced an invalid result."""


class ResourceError(MagicSpectraError):
    """A memory or enumeration budget would be exceeded."""
