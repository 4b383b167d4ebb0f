"""Exception hierarchy.  Every error raised on purpose derives from YTestError."""


class YTestError(ValueError):
    pass


class InsufficientData(YTestError):
    """Too few rows for the requested regression, or an empty dataset."""


class DegenerateDesign(YTestError):
    """Predictor columns are (numerically) collinear or constant."""


class DegenerateFit(YTestError):
    """Residuals vanish, so standard errors and p-values are undefined."""


class RoleConflict(YTestError):
    """Variable roles overlap, or two records do not describe the same pair."""


class EmptyRequest(YTestError):
    pass


class UnknownGraph(YTestError):
    pass


class DataError(YTestError):
    """Malformed input file or non-finite values."""
