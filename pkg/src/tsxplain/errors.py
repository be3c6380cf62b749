"""Exception taxonomy shared across the workbench."""


class TsxplainError(Exception):
    """Base class for all workbench errors."""


class EmptyInputError(TsxplainError):
    pass


class RaggedRowsError(TsxplainError):
    pass


class NonNumericError(TsxplainError):
    pass


class InvalidParamsError(TsxplainError):
    pass


class ShapeMismatchError(TsxplainError):
    pass


class NonFiniteLossError(TsxplainError):
    pass


class NonFiniteError(TsxplainError):
    pass


class ManifestParseError(TsxplainError):
    pass


class UnknownLayerKindError(TsxplainError):
    pass


class DegenerateDesignError(TsxplainError):
    pass


class PerplexityTooLargeError(TsxplainError):
    pass


class DimensionMismatchError(TsxplainError):
    pass


class NoUnlikeNeighborError(TsxplainError):
    pass


class NoFlipWithinBudgetError(TsxplainError):
    pass


class MissingAttributionsError(TsxplainError):
    pass


class IndexOutOfRangeError(TsxplainError):
    pass


class UnknownMethodError(TsxplainError):
    pass


class MissingContextError(TsxplainError):
    pass


class InvalidConfigError(TsxplainError):
    pass


class SessionNotFoundError(TsxplainError):
    pass
