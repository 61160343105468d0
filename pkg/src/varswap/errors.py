"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2);
``NumericalError`` subclasses signal a numerical failure (exit code 3).
"""


class VarSwapError(Exception):
    pass


class ValidationError(VarSwapError, ValueError):
    pass


class NumericalError(VarSwapError, ArithmeticError):
    pass


class FellerViolation(ValidationError):
    pass


class CorrelationOutOfRange(ValidationError):
    pass


class NonPositiveInitialState(ValidationError):
    pass


class DegenerateParameter(ValidationError):
    pass


class InvalidWindow(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class OutsideMomentDomain(ValidationError):
    pass


class InadmissibleExponent(ValidationError):
    pass


class StencilOutsideAdmissibleRegion(ValidationError):
    pass


class FitDomainError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class NonConvergent(NumericalError):
    pass


class OdeNonConvergence(NumericalError):
    pass


class SingularF(NumericalError):
    pass


class SeriesNonConvergent(NumericalError):
    pass


class NegativeRadicand(NumericalError):
    pass


class NoRootFound(NumericalError):
    pass


class Overflow(NumericalError, OverflowError):
    pass
