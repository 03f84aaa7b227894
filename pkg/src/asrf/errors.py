"""Common error types.

``DataError`` is the base for every failure caused by bad input data; the
CLI maps it to exit code 2 (usage problems exit 1).
"""


class DataError(Exception):
    """Invalid or inconsistent input data."""


class ParseError(DataError):
    """A record could not be parsed. Carries file path and line number."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:" if line is None else f"{path}:{line}: "
        super().__init__(f"{where}{message}")
