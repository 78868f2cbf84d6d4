"""Shared exception types."""


class DeferkitError(Exception):
    """Base class for all deferkit errors."""


class IoError(DeferkitError):
    pass


class SchemaError(DeferkitError):
    pass


class DuplicateIdError(DeferkitError):
    pass


class FractionError(DeferkitError):
    pass


class EmptyInput(DeferkitError):
    pass


class LengthMismatch(DeferkitError):
    pass


class MissingSource(DeferkitError):
    pass


class UnlabeledRecords(DeferkitError):
    pass


class SingleClassError(DeferkitError):
    pass


class DimensionMismatch(DeferkitError):
    pass


class EmptySequence(DeferkitError):
    pass


class EmptyBatch(DeferkitError):
    pass


class StrategyMismatch(DeferkitError):
    pass


class GammaRange(DeferkitError):
    pass


class BudgetRange(DeferkitError):
    pass


class DegenerateVariance(DeferkitError):
    pass


class DegenerateMargin(DeferkitError):
    pass


class AllZeroDifferences(DeferkitError):
    pass


class IncompleteSession(DeferkitError):
    pass


class UnknownCaseId(DeferkitError):
    pass


class ParameterRange(DeferkitError):
    pass


class CorruptLog(DeferkitError):
    pass
