"""Exception hierarchy shared by every module."""


class DymartError(Exception):
    """Base class for all library errors."""


class DomainError(DymartError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(DomainError):
    """Requested depth exceeds the configured cap."""


class StructuralError(DymartError, ValueError):
    """A process or file does not have the expected shape."""


class MartingaleError(DymartError, ValueError):
    """A process fails the martingale property beyond tolerance."""

    def __init__(self, message, step=None, violation=None):
        super().__init__(message)
        self.step = step
        self.violation = violation


class PredictabilityError(DymartError, ValueError):
    """An integrand slice is not measurable at its own level."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SolverError(DymartError, ArithmeticError):
    """The SDE scheme produced a non-finite drift or diffusion value."""
