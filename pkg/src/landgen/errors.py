"""Exception types shared across the package."""


class LandgenError(Exception):
    """Base class for all package errors."""


class ParameterError(LandgenError):
    """An argument violates a documented precondition."""


class ShapeError(LandgenError):
    """Array dimensions do not match the declared contract."""


class ContractError(LandgenError):
    """An internal contract was violated (e.g. a stale backprop cache)."""


class DatasetFormatError(LandgenError):
    """A dataset or checkpoint file failed to parse.

    Carries the offending record index (0 = header) when known.
    """

    def __init__(self, message: str, record_index: int | None = None):
        if record_index is not None:
            message = f"record {record_index}: {message}"
        super().__init__(message)
        self.record_index = record_index


class TrainingDivergedError(LandgenError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, message: str, block: str | None = None):
        if block is not None:
            message = f"{message} (parameter block: {block})"
        super().__init__(message)
        self.block = block
