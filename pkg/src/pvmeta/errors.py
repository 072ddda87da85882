"""Exception hierarchy. Each family maps to one CLI exit code."""


class PvMetaError(Exception):
    exit_code = 1


class ValidationError(PvMetaError, ValueError):
    """Bad configuration or arguments."""

    exit_code = 2


class DataError(PvMetaError):
    """Input files or datasets violate their contract."""

    exit_code = 3


class NumericalError(PvMetaError):
    exit_code = 4


class MissingColumn(DataError):
    def __init__(self, column: str, path=None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class MalformedRow(DataError):
    """A data row violates the schema; ``row`` is 1-based, header excluded."""

    def __init__(self, row: int, reason: str, line: int | None = None):
        self.row = row
        self.line = line
        self.reason = reason
        at = f"row {row}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{at}: {reason}")


class NonMonotonicTimestamps(DataError):
    def __init__(self, row: int, detail: str = ""):
        self.row = row
        super().__init__(f"timestamps not strictly increasing at row {row}" + (f": {detail}" if detail else ""))


class IrregularSampling(DataError):
    pass


class EmptyProfile(DataError):
    pass


class NoDaylightSamples(DataError):
    pass


class LengthMismatch(ValidationError):
    pass


class InvalidScenario(ValidationError):
    def __init__(self, field: str, reason: str = "missing"):
        self.field = field
        super().__init__(f"invalid scenario field {field!r}: {reason}")


class FactorizationFailure(NumericalError):
    pass


class DegeneratePrior(ValidationError):
    pass


class NonFiniteScore(NumericalError):
    pass


class SensitivityViolated(ValidationError):
    pass
