"""A preprocessed document together with its sentence and document embeddings."""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .embedding_space import EmbeddingSpace, embed_document, embed_tokens
from .model import TrainingExample
from .text_pipeline import PreprocessOptions, SentenceSpan, preprocess, split_sentences

logger = logging.getLogger(__name__)


@dataclass
class Document:
    """Sentences of one text with their embeddings.

    ``vectors`` has one row per sentence; rows of sentences with no
    in-vocabulary token are zero and flagged false in ``usable``. Such
    sentences are never scored or selected.
    """

    text: str
    sentences: List[SentenceSpan]
    vectors: np.ndarray
    usable: np.ndarray
    embedding: np.ndarray
    degenerate: bool

    @property
    def usable_indices(self) -> np.ndarray:
        return np.flatnonzero(self.usable)

    @property
    def usable_vectors(self) -> np.ndarray:
        return self.vectors[self.usable]

    @property
    def word_count(self) -> int:
        return sum(s.word_count for s in self.sentences)

    @property
    def tokens(self) -> List[str]:
        return [t for s in self.sentences for t in s.tokens]

    def __len__(self) -> int:
        return len(self.sentences)


def build_document(raw: str, space: EmbeddingSpace,
                   opts: PreprocessOptions = PreprocessOptions()) -> Document:
    text = preprocess(raw, opts)
    sentences = split_sentences(text)
    vectors = np.zeros((len(sentences), space.dim))
    usable = np.zeros(len(sentences), dtype=bool)
    for i, span in enumerate(sentences):
        vec, degenerate = embed_tokens(space, span.tokens)
        vectors[i] = vec
        usable[i] = not degenerate
    embedding, degenerate = embed_document(space, sentences)
    return Document(text, sentences, vectors, usable, embedding, degenerate)


def training_example(doc: Document, summary: Document) -> Optional[TrainingExample]:
    """Pair a document with its reference summary for training.

    Returns None when either side has no usable embedding.
    """
    if summary.degenerate or not doc.usable.any():
        return None
    counts = np.array([doc.sentences[i].word_count for i in doc.usable_indices], dtype=np.float64)
    return TrainingExample(doc.embedding, doc.usable_vectors, counts, summary.embedding)


def build_pairs(records, space: EmbeddingSpace,
                opts: PreprocessOptions = PreprocessOptions()):
    """``(document, summary)`` Document pairs for corpus records."""
    return [(build_document(r.document, space, opts), build_document(r.summary, space, opts))
            for r in records]


def training_examples(pairs) -> List[TrainingExample]:
    examples = []
    for i, (doc, summary) in enumerate(pairs):
        ex = training_example(doc, summary)
        if ex is None:
            logger.warning("skipping pair %d: no usable document sentence or empty summary embedding", i)
        else:
            examples.append(ex)
    return examples
