"""Exception hierarchy shared by every module."""


class PadicGapError(Exception):
    """Base class for all errors raised by this package."""


class NotPrime(PadicGapError, ValueError):
    pass


class NotPAdicInteger(PadicGapError, ValueError):
    pass


class ZeroDenominator(PadicGapError, ZeroDivisionError):
    pass


class PrecisionMismatch(PadicGapError, ValueError):
    pass


class NotAUnit(PadicGapError, ValueError):
    pass


class NoRoot(PadicGapError, ValueError):
    pass


class LiftingFails(PadicGapError, ValueError):
    pass


class PrecisionExhausted(PadicGapError, ArithmeticError):
    """Raised when a computation consumes all available p-adic digits."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


# power series
class CompositionDiverges(PadicGapError, ValueError):
    pass


class NotInvertible(PadicGapError, ValueError):
    pass


class OutsideRadius(PadicGapError, ValueError):
    pass


class IndistinguishableFromZero(PadicGapError, ValueError):
    pass


class ExpDiverges(PadicGapError, ArithmeticError):
    pass


# dynamics
class BadReduction(PadicGapError, ValueError):
    pass


class ClassNotStable(PadicGapError, ValueError):
    pass


class DenominatorNotUnit(PadicGapError, ArithmeticError):
    pass


# linearization
class NoConvergence(PadicGapError, ArithmeticError):
    pass


class PeriodicAnchor(PadicGapError, ValueError):
    pass


class NotQuasiperiodic(PadicGapError, ValueError):
    pass


class PrimeTooSmall(PadicGapError, ValueError):
    pass


class WrongClass(PadicGapError, ValueError):
    """A linearization was requested for a fixed point of the wrong type."""


# growth
class ArityMismatch(PadicGapError, ValueError):
    pass


class EmptySeries(PadicGapError, ValueError):
    pass


class MultipleZeros(PadicGapError, ValueError):
    pass


class NoZero(PadicGapError, ValueError):
    pass


# pipeline
class NoPrimeFound(PadicGapError, LookupError):
    pass


class WrongShape(PadicGapError, ValueError):
    pass


# counterexample
class WindowViolation(PadicGapError, AssertionError):
    pass


class BudgetExceeded(PadicGapError, OverflowError):
    def __init__(self, message, completed=None):
        super().__init__(message)
        self.completed = completed
