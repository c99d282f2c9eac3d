"""Word-vector tables and averaged sentence/document embeddings."""
import logging
from dataclasses import dataclass
from typing import BinaryIO, Dict, Iterable, Sequence, TextIO, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateToken,
    EmbeddingFormatError,
    MalformedHeader,
    VocabSizeMismatch,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingSpace:
    """Read-only token -> vector table.

    ``vectors`` is an (vocab_size, dim) float64 array whose write flag is
    cleared on construction; ``index`` maps tokens to rows.
    """

    index: Dict[str, int]
    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.index):
            raise ValueError("vectors must be a (vocab_size, dim) array")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("word vectors must be finite")
        self.vectors.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def vocab_size(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @classmethod
    def from_dict(cls, table: Dict[str, Sequence[float]]) -> "EmbeddingSpace":
        tokens = list(table)
        vectors = np.array([table[t] for t in tokens], dtype=np.float64)
        if not tokens:
            raise ValueError("empty embedding table")
        return cls({t: i for i, t in enumerate(tokens)}, vectors)

    def dump(self, stream: TextIO) -> None:
        """Write the table in the headered text format ``load_word_vectors`` reads."""
        stream.write(f"{self.vocab_size} {self.dim}\n")
        for token, row in self.index.items():
            values = " ".join(repr(float(v)) for v in self.vectors[row])
            stream.write(f"{token} {values}\n")


def load_word_vectors(
    source: Union[BinaryIO, TextIO, Iterable[str]], has_header: bool = True
) -> EmbeddingSpace:
    """Parse a word-vector table in the common text format.

    The first line is ``"vocab_size dim"`` unless ``has_header`` is false,
    in which case the dimension is taken from the first token line.
    """
    lines = iter(source)
    index: Dict[str, int] = {}
    rows = []
    expected_size = None
    dim = None
    line_no = 0

    if has_header:
        header = _decode(next(lines, b""))
        line_no = 1
        parts = header.split()
        try:
            expected_size, dim = (int(p) for p in parts)
        except ValueError:
            raise MalformedHeader(f"bad header line: {header.strip()!r}") from None
        if expected_size < 0 or dim <= 0:
            raise MalformedHeader(f"bad header line: {header.strip()!r}")

    for raw in lines:
        line_no += 1
        line = _decode(raw).rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        token, *values = line.rstrip().split(" ")
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise DimensionMismatch(
                f"line {line_no}: expected {dim} values, got {len(values)}", line_no
            )
        if token in index:
            raise DuplicateToken(token, line_no)
        try:
            rows.append([float(v) for v in values])
        except ValueError:
            raise EmbeddingFormatError(f"line {line_no}: non-numeric value") from None
        index[token] = len(index)

    if expected_size is not None and expected_size != len(index):
        raise VocabSizeMismatch(
            f"header announces {expected_size} tokens, found {len(index)}"
        )
    if not index:
        raise EmbeddingFormatError("no word vectors found")
    logger.info("loaded %d word vectors of dimension %d", len(index), dim)
    return EmbeddingSpace(index, np.array(rows, dtype=np.float64))


def load_word_vectors_file(path, has_header: bool = True) -> EmbeddingSpace:
    with open(path, "rb") as fh:
        return load_word_vectors(fh, has_header=has_header)


def _decode(raw) -> str:
    return raw.decode("utf-8") if isinstance(raw, bytes) else raw


def embed_tokens(space: EmbeddingSpace, tokens: Iterable[str]) -> Tuple[np.ndarray, bool]:
    """Mean of the in-vocabulary token vectors.

    Returns ``(vector, degenerate)``; ``degenerate`` is true when no token was
    in the vocabulary, in which case ``vector`` is all zeros.
    """
    rows = [space.index[t] for t in tokens if t in space.index]
    if not rows:
        return np.zeros(space.dim), True
    # sorted rows keep the mean bitwise identical under token permutation
    rows.sort()
    return space.vectors[rows].mean(axis=0), False


def embed_document(space: EmbeddingSpace, sentences) -> Tuple[np.ndarray, bool]:
    """Token-level mean over every sentence of a document."""
    return embed_tokens(space, [t for s in sentences for t in s.tokens])
