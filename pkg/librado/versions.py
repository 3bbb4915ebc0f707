from dataclasses import dataclass

from librado.exceptions import CorruptDocumentError, VersionError


@dataclass(frozen=True)
class FormatVersion:
    """
    Version of a persisted document, written as "major.minor".

    A reader understands every document with the same major version and a
    minor version not newer than its own.
    """
    major: int = 1
    minor: int = 0

    @staticmethod
    def deserialize(text):
        try:
            major, minor = str(text).split('.')
            return FormatVersion(int(major), int(minor))
        except (TypeError, ValueError):
            raise CorruptDocumentError(f'malformed format version {text!r}')

    def serialize(self):
        return f'{self.major}.{self.minor}'

    def check_readable_by(self, reader):
        if self.major != reader.major or self.minor > reader.minor:
            raise VersionError(
                f'document format version {self.serialize()} cannot be read '
                f'by reader version {reader.serialize()}'
            )

    def __repr__(self):
        return self.serialize()
