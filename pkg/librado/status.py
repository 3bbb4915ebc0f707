from enum import IntEnum

from librado.exceptions import (
    DataError, DocumentError, NumericError, UsageError, CouplingError
)


class ExitStatus(IntEnum):
    Success = 0
    Usage = 1
    Data = 2
    Numeric = 3


def status_for_error(error):
    """
    Maps an exception raised by the library to the exit code reported by
    the command line front end
    """
    if isinstance(error, NumericError):
        return ExitStatus.Numeric
    if isinstance(error, (UsageError, CouplingError)):
        return ExitStatus.Usage
    if isinstance(error, (DataError, DocumentError, OSError)):
        return ExitStatus.Data
    if isinstance(error, ValueError):
        return ExitStatus.Usage
    raise error


def is_failure(status):
    return int(status) != ExitStatus.Success
