"""Exception hierarchy.

Two families matter to callers: bad input (``ValidationError``) and numerical
failure (``NumericalError``). The CLI maps them to exit codes 2 and 3.
"""


class HyperkappaError(Exception):
    """Base class for all errors raised by this package."""

    #: short machine-readable name of the violated invariant
    invariant = "unknown"

    def __init__(self, message, invariant=None):
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant


class ValidationError(HyperkappaError, ValueError):
    """Input does not satisfy a precondition."""

    invariant = "validation"


class UnsupportedConfigurationError(ValidationError):
    """Input is valid in general but not handled by this code path."""

    invariant = "configuration"


class NumericalError(HyperkappaError, ArithmeticError):
    """A computation ran but failed a numerical postcondition."""

    invariant = "numerical"


class ConvergenceError(NumericalError):
    """An iterative scheme hit its cap before reaching the tolerance."""

    invariant = "convergence"

    def __init__(self, message, achieved=None, invariant=None):
        super().__init__(message, invariant)
        self.achieved = achieved
