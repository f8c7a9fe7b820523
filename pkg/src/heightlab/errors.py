"""Exception hierarchy shared by every heightlab module."""


class HeightlabError(Exception):
    """Base class for all errors raised by heightlab."""


class InvalidPoint(HeightlabError, ValueError):
    """A point is malformed, all-zero, or not on the model it claims."""


class ModelMismatch(HeightlabError, ValueError):
    pass


class UndefinedAtPoint(HeightlabError, ValueError):
    """The chosen height representative is singular at the point."""


class UndefinedIntersection(HeightlabError, ValueError):
    pass


class NotPseudoEffective(HeightlabError, ValueError):
    pass


class UnknownCurve(HeightlabError, KeyError):
    pass


class UnknownMap(HeightlabError, KeyError):
    pass


class RequiresAmple(HeightlabError, ValueError):
    pass


class ConvergenceFailure(HeightlabError, ArithmeticError):
    pass


class Inconclusive(HeightlabError):
    pass


class ConfigError(HeightlabError, ValueError):
    pass
