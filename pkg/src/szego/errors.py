"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad input, CLI exit 2)
and ``NumericalError`` (a computation could not be certified, CLI exit 3).
"""


class SzegoError(Exception):
    """Base class for all package errors."""


class ValidationError(SzegoError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(SzegoError, ArithmeticError):
    """A numerical step failed its own accuracy or structure check."""


class AliasError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class UnstableDenominatorError(ValidationError):
    """Denominator polynomial has a root in the closed unit disc."""


class GapError(ValidationError):
    """Singular values are not strictly decreasing with the required gap."""


class StepSizeError(ValidationError):
    pass


class DegreeMismatchError(NumericalError):
    pass


class StructureError(NumericalError):
    pass


class InconsistentSpectrumError(NumericalError):
    pass


class InvertibilityError(NumericalError):
    pass


class ResolutionError(NumericalError):
    """Truncation too small to represent the requested quantity."""


class DriftError(NumericalError):
    """A conserved quantity drifted beyond tolerance during integration."""


class IllConditionedError(NumericalError):
    pass


class DegenerateConstructionError(NumericalError):
    pass
