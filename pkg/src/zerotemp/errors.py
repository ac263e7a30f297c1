"""Exception types shared across the package."""


class ZerotempError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ZerotempError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class OrbitOverflow(ZerotempError, OverflowError):
    """An orbit produced a non-finite value.

    Parameters
    ----------
    step : int
        Index of the first non-finite orbit point.
    """

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite orbit value at step {step}")


class NoConvergence(ZerotempError, ArithmeticError):
    """Newton (or bisection) iteration failed to converge.

    The last iterate is kept on the exception so callers can inspect it.
    """

    def __init__(self, message, last=None):
        self.last = last
        super().__init__(message)


class SingularityError(ZerotempError, ZeroDivisionError):
    """A quantity that must be nonzero vanished numerically."""


class BracketExhausted(ZerotempError, RuntimeError):
    """A parameter scan found no subinterval with the requested itinerary."""

    def __init__(self, message, scanned=()):
        self.scanned = list(scanned)
        super().__init__(message)


class PrecisionExhausted(ZerotempError, ArithmeticError):
    """An enclosure became too wide for the working precision."""


class AmbiguousPrediction(ZerotempError, ValueError):
    """Sign labels inside a temperature window disagree."""
