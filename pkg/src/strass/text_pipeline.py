"""Preprocessing, sentence splitting and tokenization.

Sentences end at ``.``, ``!`` or ``?`` followed by whitespace or end of
text. Tokens are maximal runs of letters and digits. Abbreviations such as
``art.`` are not special-cased, so they do end a sentence.
"""
import re
import unicodedata
from dataclasses import dataclass
from typing import List

_TOKEN_RE = re.compile(r"[^\W_]+")
_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class PreprocessOptions:
    lowercase: bool = True
    strip_accents: bool = True


@dataclass(frozen=True)
class SentenceSpan:
    index: int
    tokens: List[str]
    text: str = ""

    @property
    def word_count(self) -> int:
        return len(self.tokens)


def _strip_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    kept = "".join(c for c in decomposed if not unicodedata.combining(c))
    return unicodedata.normalize("NFC", kept)


def preprocess(raw: str, opts: PreprocessOptions = PreprocessOptions()) -> str:
    """Lowercase and/or remove accents from ``raw``.

    >>> preprocess("Élevé")
    'eleve'
    """
    text = raw
    if opts.lowercase:
        text = text.lower()
    if opts.strip_accents:
        text = _strip_accents(text)
    return text


def tokenize(sentence_text: str) -> List[str]:
    return _TOKEN_RE.findall(sentence_text)


def split_sentences(text: str) -> List[SentenceSpan]:
    """Split ``text`` into sentences that contain at least one token.

    Pieces between terminators that carry no token (stray punctuation) are
    dropped, so indices stay contiguous over the returned spans.
    """
    spans = []
    for piece in _BOUNDARY_RE.split(text):
        tokens = tokenize(piece)
        if tokens:
            spans.append(SentenceSpan(len(spans), tokens, piece.strip()))
    return spans
