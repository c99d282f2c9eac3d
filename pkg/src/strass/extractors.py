"""Sentence selection at inference time.

STRASS, the untrained baseline and the Oracle all score usable sentences
with ncos_plus against a target point and keep every sentence scoring at
least the threshold; they differ only in the target (transformed document
embedding, raw document embedding, reference summary embedding).
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .document import Document
from .errors import NoUsableSentences
from .model import AffineTransform, transform
from .similarity import cos_sim_many, ncos_plus

EXTRACTORS = ("strass", "baseline", "oracle", "oracle-sent", "lead3")


@dataclass(frozen=True)
class Selection:
    """Selected sentence indices in document order.

    ``scores`` are aligned with ``indices``: ncos_plus scores for threshold
    extractors, the winning cosine for oracle-sent, empty for lead3.
    """

    indices: Tuple[int, ...]
    scores: Tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.indices)

    def as_set(self) -> set:
        return set(self.indices)


def score_sentences(doc: Document, target) -> np.ndarray:
    """ncos_plus of every sentence against ``target``; NaN for unusable sentences."""
    if not doc.usable.any():
        raise NoUsableSentences("document has no sentence with a known token")
    scores = np.full(len(doc), np.nan)
    scores[doc.usable] = ncos_plus(doc.usable_vectors, target)
    return scores


def _threshold_select(doc: Document, target, t: float) -> Selection:
    scores = score_sentences(doc, target)
    keep = [int(i) for i in doc.usable_indices if scores[i] >= t]
    return Selection(tuple(keep), tuple(float(scores[i]) for i in keep))


def extract_strass(params: AffineTransform, doc: Document, t: float) -> Selection:
    return _threshold_select(doc, transform(params, doc.embedding), t)


def extract_baseline(doc: Document, t: float) -> Selection:
    return _threshold_select(doc, doc.embedding, t)


def extract_oracle(doc: Document, ref_sum, t: float) -> Selection:
    return _threshold_select(doc, np.asarray(ref_sum, dtype=np.float64), t)


def extract_oracle_sent(doc: Document, ref_sentences: Sequence) -> Selection:
    """Closest document sentence to each reference sentence, deduplicated.

    Ties go to the lowest sentence index.
    """
    if len(ref_sentences) == 0:
        raise ValueError("oracle-sent needs at least one reference sentence")
    if not doc.usable.any():
        raise NoUsableSentences("document has no sentence with a known token")
    usable = doc.usable_indices
    best = {}
    for ref in ref_sentences:
        sims = cos_sim_many(doc.usable_vectors, ref)
        k = int(np.argmax(sims))  # first maximum, i.e. lowest index
        idx = int(usable[k])
        best[idx] = max(best.get(idx, -np.inf), float(sims[k]))
    keep = sorted(best)
    return Selection(tuple(keep), tuple(best[i] for i in keep))


def extract_lead3(doc: Document) -> Selection:
    return Selection(tuple(range(min(3, len(doc)))))


def render_summary(doc: Document, sel: Selection) -> str:
    return " ".join(doc.sentences[i].text for i in sel.indices)
