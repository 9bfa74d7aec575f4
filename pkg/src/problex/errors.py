"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, parse and data
errors exit 2, numerical failures exit 3.
"""


class PlexError(Exception):
    """Base class for all package-specific errors."""


class ParseError(PlexError):
    """A text input file violates its format; carries path and line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class NotFoundError(PlexError):
    """A token or verb slot is missing from a vocabulary or table."""


class DataError(PlexError):
    """Inputs are well-formed but semantically unusable."""


class NumericalError(PlexError):
    """A probability computation is undefined (zero mass, failed training)."""


class UsageError(PlexError):
    """An API or CLI call violates its contract."""
