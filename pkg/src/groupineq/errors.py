"""Exception hierarchy shared by every module of the package."""


class InequalityError(Exception):
    """Base class for all errors raised by :mod:`groupineq`."""


class DomainError(InequalityError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(InequalityError, ValueError):
    """Grouped data (or its textual form) violates a structural invariant."""


class FitError(InequalityError, RuntimeError):
    """A density reconstruction could not be obtained.

    ``residual`` carries the best objective value reached, when one exists.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalError(InequalityError, ArithmeticError):
    """A numerical routine produced an unusable result."""


class IntervalError(InequalityError, RuntimeError):
    """A confidence interval could not be formed."""
