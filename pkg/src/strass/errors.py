class StrassError(Exception):
    """Base class for every error raised by this package."""


class EmbeddingFormatError(StrassError, ValueError):
    pass


class MalformedHeader(EmbeddingFormatError):
    pass


class VocabSizeMismatch(EmbeddingFormatError):
    pass


class DuplicateToken(EmbeddingFormatError):
    def __init__(self, token: str, line_no: int):
        super().__init__(f"line {line_no}: duplicate token {token!r}")
        self.token = token
        self.line_no = line_no


class DimensionMismatch(StrassError, ValueError):
    """Vector length disagrees with the expected dimension.

    ``line_no`` is set when the mismatch was found while parsing a file.
    """

    def __init__(self, message: str, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class ZeroVector(StrassError, ValueError):
    pass


class EmptySet(StrassError, ValueError):
    pass


class AllZeroSelection(StrassError, ValueError):
    pass


class NonFiniteLoss(StrassError, FloatingPointError):
    pass


class MalformedCheckpoint(StrassError, ValueError):
    pass


class VersionMismatch(MalformedCheckpoint):
    pass


class NoUsableSentences(StrassError, ValueError):
    pass


class MalformedRecord(StrassError, ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class DuplicateId(StrassError, ValueError):
    pass


class EmptySplit(StrassError, ValueError):
    pass
