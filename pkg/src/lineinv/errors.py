"""Exception hierarchy. Every numerical failure derives from ScatteringError."""


class ScatteringError(Exception):
    """Base class for numerical failures (CLI exit code 3)."""


class PotentialFormatError(ValueError):
    """Malformed potential description or file (CLI exit code 2)."""


class StepTooCoarse(ScatteringError):
    pass


class ScanTooCoarse(ScatteringError):
    pass


class NotExceptional(ScatteringError):
    pass


class HasBoundStates(ScatteringError):
    pass


class OrderingViolation(ScatteringError):
    pass


class NonPositiveChi(ScatteringError):
    pass


class NoSuchBoundState(ScatteringError):
    pass


class InconclusiveLimit(ScatteringError):
    pass


class AnalyticModelRequired(ScatteringError):
    pass


class TailTooFat(ScatteringError):
    pass


class ParityMismatch(ScatteringError):
    pass


class WindowTooSmall(ScatteringError):
    pass


class NegativeDiscriminant(ScatteringError):
    pass
