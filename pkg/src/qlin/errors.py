"""Exception types raised across the package."""


class QlinError(Exception):
    pass


class ParseError(QlinError):
    pass


class DimensionError(QlinError, ValueError):
    pass


class GenerationError(QlinError):
    pass


class NumericalError(QlinError):
    """Simplex hit its iteration limit."""


class InfeasibleInstance(QlinError):
    pass


class MissingConstraint(QlinError):
    pass


class MissingBounds(QlinError):
    pass


class IncompatibleVariant(QlinError):
    pass


class InfeasiblePoint(QlinError):
    pass


class TooLarge(QlinError):
    pass


class NodeLimitExceeded(QlinError):
    pass
