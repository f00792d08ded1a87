"""Exception hierarchy shared by all modules."""


class RenyiError(Exception):
    """Base class for errors raised by this package."""


class DomainError(RenyiError, ValueError):
    """An argument lies outside [0, 1] or is not finite."""


class InvalidDigitError(RenyiError, ValueError):
    """A digit sequence contains a digit smaller than N."""


class NumericalError(RenyiError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy value."""


class ToleranceNotReachedError(NumericalError):
    """A branch series needed more terms than the hard cap allows."""


class NoRootError(NumericalError):
    """A bracketed root search had no sign change to work with."""


class NoSignChangeError(NoRootError):
    """The quartic in t does not change sign on [0, 1]."""


class ConditionViolationError(NumericalError):
    """A root was found but the side conditions on the quartic fail there."""


class CertificationError(NumericalError):
    """A validation step of the rate certificate failed."""


class InsufficientDataError(RenyiError, ValueError):
    """Too few usable points to fit a decay rate."""


class DegenerateCurveError(InsufficientDataError):
    """The error curve sits at the numerical floor (e.g. stationary start)."""


class NonPositiveError(NumericalError):
    """A sup-error is zero or negative where a logarithm is needed."""


class PositivityError(RenyiError, ValueError):
    """The derivative of the initial density transform is not positive."""
