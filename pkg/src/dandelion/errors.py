"""Exception hierarchy.

``DataError`` subclasses signal bad input data (CLI exit code 2);
``InvalidParams`` signals a bad argument or configuration value.
"""


class DandelionError(Exception):
    pass


class DataError(DandelionError):
    pass


class ParseError(DataError):
    def __init__(self, record, reason):
        self.record = record
        self.reason = reason
        super().__init__(f"record {record}: {reason}")


class EmptyTrack(DataError):
    pass


class NonFinite(DataError, ValueError):
    pass


class MissingLabel(DataError):
    pass


class InvalidParams(DandelionError, ValueError):
    pass


class ImageTooLarge(DandelionError):
    pass


class LayoutFailure(DandelionError):
    pass
