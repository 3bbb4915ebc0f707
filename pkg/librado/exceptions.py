class LibradoError(Exception):
    """Base class for every error raised by librado"""


class UsageError(LibradoError, ValueError):
    pass


class DataError(LibradoError, ValueError):
    pass


class ParseError(DataError):
    pass


class LabelError(DataError):
    pass


class MissingValueError(DataError):
    pass


class DimensionError(DataError):
    pass


class StratificationError(DataError):
    pass


class EnumerationCapError(DataError):
    def __init__(self, m, cap):
        super().__init__(
            f'refusing to enumerate 2^{m} rados: m={m} exceeds cap {cap}'
        )
        self.m = m
        self.cap = cap


class CouplingError(LibradoError, ValueError):
    pass


class NumericError(LibradoError, ArithmeticError):
    pass


class InfiniteStepError(NumericError):
    def __init__(self, edge, iteration=None):
        where = f' at iteration {iteration}' if iteration is not None else ''
        super().__init__(
            f'edge |r|={abs(edge)} gives an infinite leveraging '
            f'coefficient{where}'
        )
        self.edge = edge
        self.iteration = iteration


class DeadFeaturesError(NumericError):
    pass


class DocumentError(LibradoError):
    pass


class VersionError(DocumentError):
    pass


class CorruptDocumentError(DocumentError):
    pass
