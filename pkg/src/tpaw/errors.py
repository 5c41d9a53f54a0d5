"""Exception types raised across the package."""


class TPAWError(Exception):
    """Base class for package errors."""


class ConstraintViolation(TPAWError, ValueError):
    """A parameter lies outside its admissible range."""


class RateMismatch(ConstraintViolation):
    """``lambda1`` disagrees with the steady-state rate ``d0 / tau0``."""


class DomainError(TPAWError, ValueError):
    """A special function was evaluated outside its domain."""


class DivisionByZero(TPAWError, ZeroDivisionError):
    """A relative metric was requested against a zero baseline."""


class InfeasibleObjective(TPAWError, ValueError):
    """The objective cannot be evaluated on the requested strategy family."""


class NumericalFailure(TPAWError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""
