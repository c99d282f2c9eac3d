import numpy as np
from strass.document import Document
from strass.text_pipeline import SentenceSpan


def make_document(vectors, d=None, word_counts=None):
    """Document with hand-placed sentence embeddings.

    Sentence ``i`` gets tokens ``s{i}w0 ...`` so rendering and ROUGE have
    something distinct to work with. ``d`` defaults to the word-count
    weighted mean of the sentence vectors.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    m = len(vectors)
    word_counts = [2] * m if word_counts is None else list(word_counts)
    sentences = [
        SentenceSpan(i, [f"s{i}w{j}" for j in range(wc)], " ".join(f"s{i}w{j}" for j in range(wc)) + ".")
        for i, wc in enumerate(word_counts)
    ]
    usable = np.linalg.norm(vectors, axis=1) > 0
    if d is None:
        d = np.asarray(word_counts, dtype=np.float64) @ vectors / sum(word_counts)
    text = " ".join(s.text for s in sentences)
    return Document(text, sentences, vectors, usable, np.asarray(d, dtype=np.float64), False)


def random_document(rng, dim=8, low=3, high=8):
    m = int(rng.integers(low, high))
    vectors = rng.normal(size=(m, dim))
    counts = rng.integers(1, 15, size=m)
    return make_document(vectors, word_counts=counts)
