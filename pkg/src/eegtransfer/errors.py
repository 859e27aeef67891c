"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class EegTransferError(Exception):
    """Base class for package errors."""


class ConfigError(EegTransferError):
    """Invalid configuration file or parameter value."""


class DataError(EegTransferError):
    """Malformed, missing or geometrically inconsistent data.

    `code` distinguishes loader failure classes ("missing-file",
    "geometry", "label", ...) for callers that dispatch on them.
    """

    def __init__(self, message: str, code: str = "data"):
        super().__init__(message)
        self.code = code
