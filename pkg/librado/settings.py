import os

from librado import ENUMERATION_CAP

# Read on every call so a .env loaded after import still applies.


def threads():
    return int(os.getenv('LIBRADO_THREADS', '1'))


def enumeration_limit():
    return int(os.getenv('LIBRADO_ENUMERATION_CAP', str(ENUMERATION_CAP)))


def log_level():
    return os.getenv('LIBRADO_LOG_LEVEL', 'WARNING').upper()
