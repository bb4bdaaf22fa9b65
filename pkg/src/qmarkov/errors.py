"""Exception hierarchy.

Every error carries a machine-readable ``code`` and an ``exit_status`` used by
the command line front-end (2 = validation, 3 = budget, 1 = internal).
"""


class QMarkovError(Exception):
    code = "internal_error"
    exit_status = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class ValidationError(QMarkovError):
    code = "validation_error"
    exit_status = 2


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class NotUnital(ValidationError):
    code = "not_unital"


class InvalidState(ValidationError):
    code = "invalid_state"


class StateNotFaithful(ValidationError):
    code = "state_not_faithful"


class StateNotInvariant(ValidationError):
    code = "state_not_invariant"


class NotSubharmonic(ValidationError):
    code = "not_subharmonic"


class NotModularInvariant(ValidationError):
    code = "not_modular_invariant"


class IllConditioned(ValidationError):
    code = "ill_conditioned"


class SchemaError(ValidationError):
    code = "schema_error"


class BudgetExceeded(QMarkovError):
    code = "budget_exceeded"
    exit_status = 3


class NumericalError(QMarkovError):
    """A computed certificate failed its own consistency check."""

    code = "numerical_error"


class SpectralError(NumericalError):
    code = "spectral_error"


class HorizonTooShort(NumericalError):
    """Iteration had not converged by the horizon although the spectrum says it will.

    The partially computed result is attached as ``result``.
    """

    code = "horizon_too_short"

    def __init__(self, message, result=None, **details):
        super().__init__(message, **details)
        self.result = result
