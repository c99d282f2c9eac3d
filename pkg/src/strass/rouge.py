"""ROUGE-1/2/L on token lists, corpus averaging and bootstrap intervals.

No stemming and no stop-word removal; tokens come from
``text_pipeline.tokenize``. ROUGE-L is the LCS over the whole summary, not
the sentence-level union variant.
"""
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

METRICS = ("rouge-1", "rouge-2", "rouge-l")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        if precision + recall == 0:
            return cls(precision, recall, 0.0)
        return cls(precision, recall, 2 * precision * recall / (precision + recall))


@dataclass(frozen=True)
class ConfidenceInterval:
    mean: float
    lower: float
    upper: float
    level: float = 0.95


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> RougeScore:
    if n < 1:
        raise ValueError("n must be at least 1")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum((cand & ref).values())
    return RougeScore.from_pr(
        _ratio(overlap, sum(cand.values())), _ratio(overlap, sum(ref.values()))
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    lcs = lcs_length(candidate, reference)
    return RougeScore.from_pr(_ratio(lcs, len(candidate)), _ratio(lcs, len(reference)))


def score_pair(candidate: Sequence[str], reference: Sequence[str]) -> Dict[str, RougeScore]:
    return {
        "rouge-1": rouge_n(candidate, reference, 1),
        "rouge-2": rouge_n(candidate, reference, 2),
        "rouge-l": rouge_l(candidate, reference),
    }


def per_document_scores(pairs: Sequence[Tuple[Sequence[str], Sequence[str]]]) -> List[Dict[str, RougeScore]]:
    return [score_pair(c, r) for c, r in pairs]


def mean_scores(per_doc: Sequence[Dict[str, RougeScore]]) -> Dict[str, RougeScore]:
    """Macro-average P, R and F1 separately for each metric."""
    if not per_doc:
        raise ValueError("no documents to average")
    out = {}
    for metric in METRICS:
        rows = np.array([[s[metric].precision, s[metric].recall, s[metric].f1] for s in per_doc])
        p, r, f = rows.mean(axis=0)
        out[metric] = RougeScore(float(p), float(r), float(f))
    return out


def corpus_rouge(pairs: Sequence[Tuple[Sequence[str], Sequence[str]]]) -> Dict[str, RougeScore]:
    return mean_scores(per_document_scores(pairs))


def bootstrap_ci(per_doc_scores: Sequence[float], resamples: int = 1000, seed: int = 0,
                 level: float = 0.95) -> ConfidenceInterval:
    """Percentile bootstrap interval for the mean of ``per_doc_scores``.

    ``mean`` is the observed sample mean; the bounds are percentiles of the
    resampled means, so with very few resamples they need not bracket it.
    """
    scores = np.asarray(per_doc_scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no scores to resample")
    if resamples < 1:
        raise ValueError("need at least one resample")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, scores.size, size=(resamples, scores.size))
    means = scores[picks].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    lower, upper = np.percentile(means, [tail, 100.0 - tail])
    return ConfidenceInterval(float(scores.mean()), float(lower), float(upper), level)
