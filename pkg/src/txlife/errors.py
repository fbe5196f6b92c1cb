"""Exception hierarchy shared by every stage of the pipeline."""


class TxlifeError(Exception):
    """Base class for all package errors."""


class DataError(TxlifeError):
    """Input data is malformed or cannot support the requested computation."""


class UnknownFormat(TxlifeError, ValueError):
    pass


class MalformedLine(DataError):
    """Raised in strict mode for the first malformed input line."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyBatch(DataError):
    pass


class InvalidWindow(TxlifeError, ValueError):
    pass


class ZeroVolume(DataError):
    pass


class AllZeroSeries(DataError):
    pass


class EmptyCohort(DataError):
    pass


class DuplicateProject(DataError):
    pass


class UnsupportedFormat(TxlifeError, ValueError):
    pass


class InvalidParams(TxlifeError, ValueError):
    pass


class ConstantInput(TxlifeError, ValueError):
    pass


class InvariantViolation(TxlifeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class MissingArtifact(TxlifeError):
    def __init__(self, path, stage: str):
        super().__init__(
            f"missing {path}; run the '{stage}' stage first (same --out directory)"
        )
        self.path = path
        self.stage = stage
