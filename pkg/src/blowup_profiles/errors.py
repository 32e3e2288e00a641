"""Exception and warning types shared by every module."""


class BlowupError(Exception):
    """Base class. ``module`` names the subsystem that raised."""

    module = "blowup_profiles"

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class DomainError(BlowupError, ValueError):
    """A parameter or argument lies outside its mathematical domain.

    ``violations`` is a list of ``(field, bound)`` pairs, one per failed bound.
    """

    def __init__(self, violations, message=None):
        if isinstance(violations, tuple):
            violations = [violations]
        self.violations = list(violations)
        if message is None:
            message = "; ".join(f"{field}: requires {bound}" for field, bound in self.violations)
        super().__init__(message, violations=[list(v) for v in self.violations])


class RegimeError(BlowupError, ValueError):
    """Operation requested outside the exponent regime where it is defined."""


class NumericalError(BlowupError, ArithmeticError):
    """Base for failures of a numerical kernel."""


class NoSignChange(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


class ToleranceNotMet(NumericalError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message, estimate=estimate, error=error)
        self.estimate = estimate
        self.error = error


class NotConverged(NumericalError):
    pass


class OutOfSpan(BlowupError, ValueError):
    pass


class TooFewSamples(BlowupError, ValueError):
    pass


class Overflow(NumericalError):
    pass


class RadiusUnderflow(UserWarning):
    """A generated radius fell below the smallest representable scale."""


class NonConvergentWarning(UserWarning):
    """Value computed on a profile where the quantity has no finite limit."""
