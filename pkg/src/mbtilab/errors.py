"""Exception types shared across the package."""


class MbtiLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(MbtiLabError):
    """An argument is outside its documented range."""


class ShapeError(MbtiLabError):
    """Array dimensions or table layout do not match expectations."""


class UndefinedInputError(MbtiLabError):
    """The operation is undefined for this input (e.g. empty post list)."""


class DegenerateLabelsError(MbtiLabError):
    """A binary operation received labels from a single class."""


class InsufficientDataError(MbtiLabError):
    """Too few rows for the requested statistic."""


class NumericError(MbtiLabError):
    """A numeric routine failed (singular matrix, non-convergence, ...)."""


class StratificationError(MbtiLabError):
    """A class is too small to stratify into the requested folds."""


class AssemblyError(MbtiLabError):
    """A record is missing data needed by a requested feature block."""


class TestUndefinedError(MbtiLabError):
    """A statistical test is undefined for the given table."""


class StageError(MbtiLabError):
    """A pipeline stage failed; message is tagged with the stage name."""
