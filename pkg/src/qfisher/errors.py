"""Exception and warning types."""


class QFisherError(Exception):
    """Base class for all errors raised by qfisher."""


class ValidationError(QFisherError, ValueError):
    """Input data violates a documented invariant."""


class DomainError(QFisherError, ValueError):
    """A parameter point lies outside the admissible domain of a model."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class PreconditionError(QFisherError, ValueError):
    """An operation was called on input that does not meet its precondition."""


class SolverError(QFisherError, ArithmeticError):
    """A numerical solve did not reach the required residual."""


class ConsistencyError(QFisherError, ArithmeticError):
    """Two independent evaluation routes of the same quantity disagree."""


class SpecError(QFisherError, ValueError):
    """Malformed model specification file."""


class SupportBoundaryWarning(UserWarning):
    """Probability vanishes at a sample point where its derivative does not."""


class FiniteDifferenceWarning(UserWarning):
    """One-sided difference quotients disagree more than expected for a C1 map."""
