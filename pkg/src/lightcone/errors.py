"""Exception hierarchy shared by all modules."""


class LightconeError(Exception):
    """Base class for every error raised by the package."""


class NumericalError(LightconeError):
    """A numerical routine could not deliver its accuracy contract."""


class DomainError(LightconeError, ValueError):
    pass


class LightConeSingularity(LightconeError, ValueError):
    """Propagator requested on the light cone with no regulator."""


class ConvergenceFailure(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass


class ZeroState(LightconeError, ValueError):
    pass


class InvalidLevels(LightconeError, ValueError):
    pass


class OrderingError(LightconeError, ValueError):
    pass


class DegenerateInput(LightconeError, ValueError):
    pass


class PlanMismatch(LightconeError, ValueError):
    pass


class EmptyCounts(LightconeError, ValueError):
    pass


class LengthMismatch(LightconeError, ValueError):
    pass


class DimensionExceeded(LightconeError, ValueError):
    pass


class DenominatorUnderflow(NumericalError):
    pass


class EigenstateAmbiguity(NumericalError):
    pass


class ParseError(LightconeError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(LightconeError, KeyError):
    def __str__(self):
        return f"unknown configuration key: {self.args[0]!r}"
