"""Exception hierarchy.

Validation errors derive from :class:`ValidationError` (a ``ValueError``),
numerical failures from :class:`NumericalError`. The CLI maps the two
families onto distinct exit codes.
"""


class DephaseError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DephaseError, ValueError):
    """Input violates a documented invariant."""


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class NonpositiveOmega(ValidationError):
    pass


class NegativeTime(ValidationError):
    pass


class RegimeUndefined(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class NonpositiveGamma(ValidationError):
    pass


class NumericalError(DephaseError, ArithmeticError):
    """A computation could not reach its requested accuracy or size limit."""


class QuadratureNonconvergence(NumericalError):
    """Raised with the best estimate attached as ``value`` and ``error``."""

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class DimensionBudgetExceeded(NumericalError):
    """Raised when a truncated Fock space would exceed the dimension budget.

    ``best_delta`` carries the last convergence delta reached before the
    budget was hit (``None`` if no comparison was possible).
    """

    def __init__(self, message, best_delta=None):
        super().__init__(message)
        self.best_delta = best_delta


class EigendecompositionFailure(NumericalError):
    pass
