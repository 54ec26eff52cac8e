"""Exception hierarchy.

The CLI maps these classes onto exit codes: configuration problems exit 1,
data/IO problems exit 2 and degenerate statistics exit 3.
"""

from __future__ import annotations


class PcCompareError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PcCompareError, ValueError):
    """An argument lies outside the domain of a mathematical function."""


class DegenerateDataError(PcCompareError, ValueError):
    """The data carry no usable variation for the requested statistic."""


class ScalingError(DegenerateDataError):
    """A centering/scaling method hit a zero denominator."""

    def __init__(self, method: str, detail: str = "") -> None:
        self.method = method
        msg = f"degenerate scaling with method '{method}'"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class ConfigError(PcCompareError, ValueError):
    """Invalid user configuration (run config, table spec, arguments)."""


class DataFormatError(PcCompareError):
    """Input data could not be read or parsed."""

    def __init__(self, path: object, message: str, line: int | None = None) -> None:
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")


class UnreadableFileError(DataFormatError):
    pass


class RaggedRowsError(DataFormatError):
    pass


class ColumnCountMismatchError(DataFormatError):
    pass


class NonNumericTokenError(DataFormatError):
    pass
