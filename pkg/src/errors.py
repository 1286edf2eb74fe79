"""
Error taxonomy for iqprob.
Every error carries a machine-readable code (its class name) and, when known,
the path of the offending input file.
"""

from typing import Optional


class IQProbError(Exception):
    """Base class for all iqprob errors"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.path = path

    @property
    def code(self) -> str:
        return type(self).__name__

    def with_path(self, path: str) -> "IQProbError":
        self.path = str(path)
        return self

    def to_dict(self) -> dict:
        return {'code': self.code, 'message': self.message, 'path': self.path}


class ValidationError(IQProbError, ValueError):
    """Input did not satisfy the contract of the operation"""


class NumericalError(IQProbError, RuntimeError):
    """A numerical backend or algorithm could not produce a trustworthy result"""


# Validation errors

class NotSquare(ValidationError):
    pass


class NonFiniteEntries(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotIdempotent(ValidationError):
    pass


class SpectrumOutOfBand(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceNotUnit(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ResolutionInvalid(ValidationError):
    pass


class ConditionOnNullEvent(ValidationError):
    pass


class IntervalOutOfRange(ValidationError):
    pass


class InvalidTolerance(ValidationError):
    pass


class MalformedInput(ValidationError):
    pass


class EmptyCredalSet(ValidationError):
    pass


class InvalidMeasure(ValidationError):
    pass


# Numerical errors

class ConvergenceFailure(NumericalError):
    pass


class BandAmbiguity(NumericalError):
    pass


class DecompositionInconsistent(NumericalError):
    pass


class LimitNotConverged(NumericalError):
    pass
