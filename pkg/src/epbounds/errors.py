"""Exception hierarchy shared by all modules."""


class EPBError(Exception):
    """Base class for epbounds errors."""


class RangeTooLarge(EPBError, ValueError):
    pass


class CorruptCheckpoint(EPBError):
    pass


class MissingCheckpoint(EPBError):
    pass


class DomainError(EPBError, ValueError):
    pass


class DenominatorNonPositive(EPBError, ValueError):
    pass


class HypothesisViolation(EPBError, ValueError):
    pass


class NonMonotoneBound(EPBError):
    pass


class NoCrossingInRange(EPBError):
    pass


class TableCoverageError(EPBError, LookupError):
    pass


class TruncationTailTooLarge(EPBError):
    pass
