"""Corpus files, split layout, statistics and synthetic corpora.

A corpus file holds one JSON object per line with string fields ``id``,
``document`` and ``summary``. A split directory holds ``train.jsonl``,
``valid.jsonl`` and ``test.jsonl``.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .embedding_space import EmbeddingSpace
from .errors import DuplicateId, EmptySplit, MalformedRecord
from .text_pipeline import PreprocessOptions, preprocess, split_sentences

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    document: str
    summary: str

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "document": self.document, "summary": self.summary},
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class CorpusStats:
    records: int
    sentences_per_doc: float
    sentences_per_summary: float
    tokens_per_doc: float
    tokens_per_summary: float


def load_corpus(source: Iterable[str]) -> List[CorpusRecord]:
    """Parse line-delimited records; blank lines are skipped.

    Records whose document is empty (or whitespace) are dropped with a
    warning.
    """
    records = []
    seen = set()
    for line_no, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "record is not an object")
        for key in ("id", "document", "summary"):
            if not isinstance(obj.get(key), str):
                raise MalformedRecord(line_no, f"missing or non-string field {key!r}")
        if obj["id"] in seen:
            raise DuplicateId(f"line {line_no}: duplicate id {obj['id']!r}")
        seen.add(obj["id"])
        if not obj["document"].strip():
            logger.warning("line %d: dropping record %r with empty document", line_no, obj["id"])
            continue
        records.append(CorpusRecord(obj["id"], obj["document"], obj["summary"]))
    return records


def load_candidates(source: Iterable[str]) -> Dict[str, str]:
    """Read ``{"id", "summary"}`` lines of system output into an id -> summary map."""
    out = {}
    for line_no, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str) \
                or not isinstance(obj.get("summary"), str):
            raise MalformedRecord(line_no, "candidate needs string fields 'id' and 'summary'")
        if obj["id"] in out:
            raise DuplicateId(f"line {line_no}: duplicate id {obj['id']!r}")
        out[obj["id"]] = obj["summary"]
    return out


def dump_corpus(records: Iterable[CorpusRecord], stream: TextIO) -> None:
    for rec in records:
        stream.write(rec.to_json() + "\n")


def load_corpus_file(path) -> List[CorpusRecord]:
    with open(path, encoding="utf-8") as fh:
        return load_corpus(fh)


def load_split(corpus_dir, split: str) -> List[CorpusRecord]:
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    path = Path(corpus_dir) / f"{split}.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"split file not found: {path}")
    records = load_corpus_file(path)
    if not records:
        raise EmptySplit(f"split {split!r} in {corpus_dir} has no records")
    return records


def write_splits(corpus_dir, splits: Dict[str, Sequence[CorpusRecord]]) -> None:
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for name, records in splits.items():
        with open(corpus_dir / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            dump_corpus(records, fh)


def split_records(records: Sequence[CorpusRecord],
                  fractions=(0.8, 0.1, 0.1)) -> Dict[str, List[CorpusRecord]]:
    """Cut ``records`` in order into train/valid/test by ``fractions``."""
    n = len(records)
    n_train = int(round(fractions[0] * n))
    n_valid = int(round(fractions[1] * n))
    return {
        "train": list(records[:n_train]),
        "valid": list(records[n_train:n_train + n_valid]),
        "test": list(records[n_train + n_valid:]),
    }


def compute_stats(records: Sequence[CorpusRecord],
                  opts: PreprocessOptions = PreprocessOptions()) -> CorpusStats:
    if not records:
        return CorpusStats(0, 0.0, 0.0, 0.0, 0.0)
    counts = np.zeros((len(records), 4))
    for i, rec in enumerate(records):
        doc = split_sentences(preprocess(rec.document, opts))
        summ = split_sentences(preprocess(rec.summary, opts))
        counts[i] = (
            len(doc),
            len(summ),
            sum(s.word_count for s in doc),
            sum(s.word_count for s in summ),
        )
    means = counts.mean(axis=0)
    return CorpusStats(len(records), *(float(m) for m in means))


# -- synthetic data -----------------------------------------------------------


@dataclass(frozen=True)
class SyntheticConfig:
    """Shape of a generated corpus.

    Every document draws one topic. Filler sentences mix that topic's tokens
    with generic tokens, so the raw document embedding sits near them.
    Planted sentences mix topic tokens with "key" tokens that all lean
    along one shared marker direction; the summary is the planted
    sentences' text.
    """

    docs: int = 200
    sentences_per_doc: int = 8
    dim: int = 16
    planted_summary_size: int = 1
    seed: int = 0
    topics: int = 12
    topic_vocab: int = 25
    generic_vocab: int = 150
    key_vocab: int = 40
    min_words: int = 6
    max_words: int = 12
    topic_share: float = 0.6
    key_share: float = 0.5
    marker_strength: float = 1.0
    token_noise: float = 0.6


def _unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def generate_synthetic(config: SyntheticConfig) -> Tuple[List[CorpusRecord], EmbeddingSpace]:
    """Generate a seeded corpus with planted summary sentences.

    Raises ``ValueError`` if a document cannot be generated in which every
    planted sentence is closer to the summary embedding than every other
    sentence.
    """
    if config.planted_summary_size > config.sentences_per_doc:
        raise ValueError("cannot plant more sentences than a document holds")
    rng = np.random.default_rng(config.seed)
    n = config.dim
    noise = config.token_noise / np.sqrt(n)
    marker = _unit(rng, n)

    table: Dict[str, np.ndarray] = {}
    topic_tokens = []
    for k in range(config.topics):
        centre = _unit(rng, n)
        names = [f"t{k}x{j}" for j in range(config.topic_vocab)]
        for name in names:
            table[name] = centre + rng.normal(0.0, noise, n)
        topic_tokens.append(names)
    generic = [f"g{j}" for j in range(config.generic_vocab)]
    for name in generic:
        table[name] = _unit(rng, n) + rng.normal(0.0, noise, n)
    keys = [f"k{j}" for j in range(config.key_vocab)]
    for name in keys:
        table[name] = config.marker_strength * marker + rng.normal(0.0, noise, n)
    space = EmbeddingSpace.from_dict(table)

    records = []
    for doc_id in range(config.docs):
        for _ in range(100):
            rec = _synthetic_record(rng, config, space, topic_tokens, generic, keys, doc_id)
            if rec is not None:
                records.append(rec)
                break
        else:
            raise ValueError(f"could not plant a recoverable summary in document {doc_id}")
    return records, space


def _synthetic_record(rng, config, space, topic_tokens, generic, keys, doc_id) -> Optional[CorpusRecord]:
    topic = topic_tokens[rng.integers(len(topic_tokens))]
    m = config.sentences_per_doc
    planted = set(rng.choice(m, size=config.planted_summary_size, replace=False).tolist())

    sentences = []
    for i in range(m):
        length = int(rng.integers(config.min_words, config.max_words + 1))
        if i in planted:
            share, other = config.key_share, keys
        else:
            share, other = 1.0 - config.topic_share, generic
        words = [
            other[rng.integers(len(other))] if rng.random() < share else topic[rng.integers(len(topic))]
            for _ in range(length)
        ]
        sentences.append(words)

    vectors = np.array([space.vectors[[space.index[w] for w in s]].mean(axis=0) for s in sentences])
    summary_tokens = [w for i in sorted(planted) for w in sentences[i]]
    summary_vec = space.vectors[[space.index[w] for w in summary_tokens]].mean(axis=0)
    cos = vectors @ summary_vec / (np.linalg.norm(vectors, axis=1) * np.linalg.norm(summary_vec))
    ranked = np.argsort(-cos)
    top = set(ranked[:len(planted)].tolist())
    if top != planted or (len(ranked) > len(planted)
                          and cos[ranked[len(planted) - 1]] <= cos[ranked[len(planted)]]):
        return None

    texts = [" ".join(s) + "." for s in sentences]
    summary = " ".join(texts[i] for i in sorted(planted))
    return CorpusRecord(f"syn-{doc_id:05d}", " ".join(texts), summary)
