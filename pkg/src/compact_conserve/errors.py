"""Exception hierarchy shared by all modules."""


class CompactSchemeError(Exception):
    """Base class for every error raised by this package."""


class SingularClosure(CompactSchemeError):
    """The closure's small linear system (or a division in it) is singular."""


class InvalidParamCount(CompactSchemeError, ValueError):
    pass


class GridTooSmall(CompactSchemeError, ValueError):
    pass


class SchemeFormatError(CompactSchemeError, ValueError):
    """A scheme file is malformed or violates a coefficient invariant."""


class SingularA(CompactSchemeError):
    pass


class LengthMismatch(CompactSchemeError, ValueError):
    pass


class ShapeMismatch(CompactSchemeError, ValueError):
    pass


class DenominatorVanishes(CompactSchemeError, ZeroDivisionError):
    pass


class NoCrossing(CompactSchemeError):
    """An error curve never reaches its threshold on the frequency grid."""


class NoFeasiblePoint(CompactSchemeError):
    pass


class NonFiniteState(CompactSchemeError, FloatingPointError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NegativePressure(NonFiniteState):
    pass


class DegenerateErrors(CompactSchemeError, ValueError):
    pass
