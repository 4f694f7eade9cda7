"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``DataFormatError`` and ``ConfigError``
exit with 2, ``DegenerateDataError`` with 3.
"""


class VolbreakError(Exception):
    """Base class for all package errors."""


class ConfigError(VolbreakError):
    """Invalid parameter or panel too small for the requested operation."""


class DataFormatError(VolbreakError):
    """Malformed input data (parse failures, broken invariants).

    ``line`` is the 1-based line number in the offending file when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class DegenerateDataError(VolbreakError):
    """Numerically degenerate input: flat price day, zero covariance, etc."""
