"""Exception hierarchy shared by every module.

Each exception carries the CLI exit code it maps to.
"""


class KahlerCritError(Exception):
    exit_code = 3


class UsageError(KahlerCritError):
    exit_code = 1


class PotentialSyntaxError(KahlerCritError):
    """Malformed potential text; ``offset`` is the UTF-8 byte offset."""

    exit_code = 2

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class BackendError(KahlerCritError):
    """Mixed backends, or an exact computation that cannot stay rational."""


class DimensionError(KahlerCritError):
    pass


class TruncationError(KahlerCritError):
    """A coefficient was requested beyond what the truncation determines."""


class ExpansionError(KahlerCritError):
    """A potential cannot be expanded with the given parameters or center."""


class NotHermitianError(KahlerCritError):
    pass


class CertificateError(KahlerCritError):
    pass
