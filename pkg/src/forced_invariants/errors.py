"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid physical or numerical parameter.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ResonanceError(ParameterError):
    """A non-resonant formula was requested inside the resonance band."""


class SingularityError(ArithmeticError):
    """An invariant or the G function was evaluated on its singular locus."""

    def __init__(self, message, branch=None, where=None):
        super().__init__(message)
        self.branch = branch
        self.where = where


class NumericalAbort(ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class MetadataMismatch(ValueError):
    """A trajectory was generated for different parameters than the invariant."""


class NearCriticalWarning(RuntimeWarning):
    """Underdamped prefactor 1/sqrt(omega^2 - (lambda/2m)^2) is very large."""
