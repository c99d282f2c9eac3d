"""Trainable affine transform of the document embedding.

Training composes four steps per document:

1. ``y = W d + b``
2. soft selection ``sel_i = sigmoid(k * (ncos_plus(s_i, y, S) - t))``
3. summary approximation ``g = sum_i s_i * words_i * sel_i``
4. loss ``lam * soft_words / doc_words - (1 - lam) * cos_sim(g, ref_sum)``

Gradients with respect to ``W`` and ``b`` are derived by hand in
``backward``; the sentence and summary embeddings are constants.
"""
import logging
import math
from dataclasses import dataclass, fields
from typing import List, NamedTuple, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .errors import (
    AllZeroSelection,
    DimensionMismatch,
    MalformedCheckpoint,
    NonFiniteLoss,
    VersionMismatch,
    ZeroVector,
)
from .similarity import Chain, cos_sim, similarity_chain

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class AffineTransform:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        n = self.b.shape[0] if self.b.ndim == 1 else -1
        if self.W.shape != (n, n):
            raise DimensionMismatch(
                f"W must be square and match b: W{self.W.shape}, b{self.b.shape}"
            )
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("transform parameters must be finite")

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "AffineTransform":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def initialize(cls, dim: int, seed: int, noise: float = 0.01) -> "AffineTransform":
        """Identity plus small seeded Gaussian noise, zero bias."""
        rng = np.random.default_rng(seed)
        return cls(np.eye(dim) + rng.normal(0.0, noise, size=(dim, dim)), np.zeros(dim))

    def copy(self) -> "AffineTransform":
        return AffineTransform(self.W.copy(), self.b.copy())

    def __eq__(self, other):
        if not isinstance(other, AffineTransform):
            return NotImplemented
        return np.array_equal(self.W, other.W) and np.array_equal(self.b, other.b)


@dataclass(frozen=True)
class Hyperparams:
    """Training and selection settings.

    ``steepness`` multiplies the sigmoid argument; 1.0 gives the unscaled
    selection function. ``literal_loss`` adds the similarity term instead of
    subtracting it, for comparison runs only.
    """

    threshold: float = 0.8
    lam: float = 0.3
    steepness: float = 1.0
    learning_rate: float = 1.0
    epochs: int = 100
    seed: int = 0
    stochastic: bool = False
    literal_loss: bool = False

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.steepness > 0.0:
            raise ValueError("steepness must be positive")
        if not self.learning_rate >= 0.0:
            raise ValueError("learning rate must be nonnegative")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")


@dataclass
class TrainingExample:
    """One document prepared for training.

    ``sentences`` holds only usable (non-degenerate) sentence embeddings, one
    per row, with matching ``word_counts``.
    """

    d: np.ndarray
    sentences: np.ndarray
    word_counts: np.ndarray
    ref_sum: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.float64)
        self.sentences = np.atleast_2d(np.asarray(self.sentences, dtype=np.float64))
        self.word_counts = np.asarray(self.word_counts, dtype=np.float64)
        self.ref_sum = np.asarray(self.ref_sum, dtype=np.float64)
        if self.sentences.shape[0] == 0:
            raise ValueError("training example needs at least one sentence")
        if self.word_counts.shape != (self.sentences.shape[0],):
            raise ValueError("one word count per sentence required")
        if np.any(self.word_counts <= 0):
            raise ValueError("word counts must be positive")

    @property
    def doc_word_count(self) -> float:
        return float(self.word_counts.sum())


def transform(params: AffineTransform, d) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (params.dim,):
        raise DimensionMismatch(
            f"embedding of shape {d.shape} does not match transform dimension {params.dim}"
        )
    return params.W @ d + params.b


def sigmoid(x):
    # tanh form stays finite for large |x| and gives exactly 0.5 at 0
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


def select_soft(scores, t: float, k: float = 1.0) -> np.ndarray:
    return sigmoid(k * (np.asarray(scores, dtype=np.float64) - t))


def approximate_summary(sentences, word_counts, sel) -> np.ndarray:
    """Word-count and selection weighted sum of sentence embeddings (unnormalized)."""
    sentences = np.atleast_2d(np.asarray(sentences, dtype=np.float64))
    weights = np.asarray(word_counts, dtype=np.float64) * np.asarray(sel, dtype=np.float64)
    if weights.shape != (sentences.shape[0],):
        raise ValueError("one weight per sentence required")
    if not np.any(weights):
        raise AllZeroSelection("no sentence carries selection weight")
    return weights @ sentences


def loss(gen_sum, ref_sum, soft_word_count: float, doc_word_count: float,
         lam: float, literal: bool = False) -> float:
    if doc_word_count <= 0:
        raise ValueError("document word count must be positive")
    sim = cos_sim(gen_sum, ref_sum)
    sign = 1.0 if literal else -1.0
    return lam * soft_word_count / doc_word_count + sign * (1.0 - lam) * sim


class Cache(NamedTuple):
    """Forward-pass values kept for ``backward``."""

    y: np.ndarray
    chain: Chain
    sel: np.ndarray
    dsel_dscore: np.ndarray
    gen_sum: np.ndarray
    soft_word_count: float
    summary_cos: float


def forward(params: AffineTransform, ex: TrainingExample, hp: Hyperparams) -> Tuple[float, Cache]:
    y = transform(params, ex.d)
    chain = similarity_chain(ex.sentences, y)
    sel = select_soft(chain.ncos, hp.threshold, hp.steepness)
    gen_sum = approximate_summary(ex.sentences, ex.word_counts, sel)
    soft = float(ex.word_counts @ sel)
    value = loss(gen_sum, ex.ref_sum, soft, ex.doc_word_count, hp.lam, hp.literal_loss)
    cache = Cache(
        y=y,
        chain=chain,
        sel=sel,
        dsel_dscore=hp.steepness * sel * (1.0 - sel),
        gen_sum=gen_sum,
        soft_word_count=soft,
        summary_cos=cos_sim(gen_sum, ex.ref_sum),
    )
    return value, cache


def backward(params: AffineTransform, ex: TrainingExample, hp: Hyperparams,
             cache: Cache) -> Tuple[np.ndarray, np.ndarray]:
    """Exact gradient of the forward loss with respect to ``W`` and ``b``.

    At a tie for the maximum rcos_plus score the gradient of the first
    maximizer is used. Where cosine clipping to [-1, 1] is active the
    clipped value is treated as smooth.
    """
    S, w = ex.sentences, ex.word_counts
    chain = cache.chain
    if chain.tied:
        # every score is pinned at 1 regardless of y
        return np.zeros_like(params.W), np.zeros_like(params.b)

    # loss -> sel
    g = cache.gen_sum
    g_norm = np.linalg.norm(g)
    ref = ex.ref_sum
    dcos_dg = ref / (g_norm * np.linalg.norm(ref)) - cache.summary_cos * g / g_norm**2
    sign = 1.0 if hp.literal_loss else -1.0
    dsel = hp.lam * w / ex.doc_word_count + sign * (1.0 - hp.lam) * w * (S @ dcos_dg)

    # sel -> ncos -> rcos (division by the max)
    dq = dsel * cache.dsel_dscore
    top = chain.rcos[chain.argmax]
    dr = dq / top
    dr[chain.argmax] -= float(dq @ chain.rcos) / top**2

    # rcos -> plus (population standardization) -> cos
    z = chain.rcos - 0.5
    dplus = (dr - dr.mean() - z * (dr @ z) / z.size) / chain.std
    dcos = 0.5 * dplus

    # cos_i = u_i . y / |y|
    y = cache.y
    y_norm = np.linalg.norm(y)
    units = S / np.linalg.norm(S, axis=1, keepdims=True)
    dy = (dcos @ units) / y_norm - (dcos @ chain.cos) * y / y_norm**2

    return np.outer(dy, ex.d), dy


def mean_loss(params: AffineTransform, corpus: Sequence[TrainingExample], hp: Hyperparams) -> float:
    return math.fsum(forward(params, ex, hp)[0] for ex in corpus) / len(corpus)


def train(
    corpus: Sequence[TrainingExample],
    hp: Hyperparams,
    init: Optional[AffineTransform] = None,
) -> Tuple[AffineTransform, List[float]]:
    """Fit the transform by gradient descent.

    Full-batch by default; with ``hp.stochastic`` the parameters are updated
    after every example, visiting examples in a seeded random order.

    Returns the trained parameters and the mean corpus loss history:
    ``history[0]`` is the loss at initialization and ``history[e]`` the loss
    after epoch ``e``.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    dim = corpus[0].d.shape[0]
    params = init.copy() if init is not None else AffineTransform.initialize(dim, hp.seed)
    rng = np.random.default_rng(hp.seed)
    history = [_checked_mean_loss(params, corpus, hp, epoch=0)]

    for epoch in range(1, hp.epochs + 1):
        if hp.stochastic:
            for i in rng.permutation(len(corpus)):
                _, cache = forward(params, corpus[i], hp)
                gW, gb = backward(params, corpus[i], hp, cache)
                params.W -= hp.learning_rate * gW
                params.b -= hp.learning_rate * gb
        else:
            gW = np.zeros_like(params.W)
            gb = np.zeros_like(params.b)
            for ex in corpus:
                _, cache = forward(params, ex, hp)
                dW, db = backward(params, ex, hp, cache)
                gW += dW
                gb += db
            params.W -= hp.learning_rate * gW / len(corpus)
            params.b -= hp.learning_rate * gb / len(corpus)
        history.append(_checked_mean_loss(params, corpus, hp, epoch))
        logger.debug("epoch %d mean loss %.6f", epoch, history[-1])

    return params, history


def _checked_mean_loss(params, corpus, hp, epoch: int) -> float:
    try:
        value = mean_loss(params, corpus, hp)
    except ZeroVector as exc:
        raise NonFiniteLoss(f"epoch {epoch}: transformed document collapsed to zero") from exc
    if not math.isfinite(value):
        raise NonFiniteLoss(
            f"epoch {epoch}: mean loss is {value}; |W|={np.linalg.norm(params.W):.3g}, "
            f"|b|={np.linalg.norm(params.b):.3g}, learning rate {hp.learning_rate}"
        )
    return value


# -- checkpoints ------------------------------------------------------------

_MAGIC = "strass-checkpoint"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_checkpoint(params: AffineTransform, hp: Hyperparams, stream: Optional[TextIO] = None) -> str:
    """Serialize parameters and hyperparameters as text.

    Floats are written with 17 significant digits so that loading restores
    them bit-exactly. Returns the text and also writes it to ``stream`` if
    given.
    """
    lines = [f"{_MAGIC} {CHECKPOINT_VERSION}", f"dim {params.dim}"]
    for f in fields(Hyperparams):
        value = getattr(hp, f.name)
        if f.type in (bool, "bool"):
            lines.append(f"{f.name} {int(value)}")
        elif f.type in (int, "int"):
            lines.append(f"{f.name} {value}")
        else:
            lines.append(f"{f.name} {_fmt(value)}")
    lines.append("W")
    lines.extend(" ".join(_fmt(v) for v in row) for row in params.W)
    lines.append("b")
    lines.append(" ".join(_fmt(v) for v in params.b))
    lines.append("end")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def load_checkpoint(source: Union[str, TextIO]) -> Tuple[AffineTransform, Hyperparams]:
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    try:
        return _parse_checkpoint(lines)
    except (IndexError, ValueError, StopIteration) as exc:
        if isinstance(exc, MalformedCheckpoint):
            raise
        raise MalformedCheckpoint(f"cannot parse checkpoint: {exc}") from None


def _parse_checkpoint(lines: List[str]) -> Tuple[AffineTransform, Hyperparams]:
    it = iter(lines)
    magic, version = next(it).split()
    if magic != _MAGIC:
        raise MalformedCheckpoint("not a checkpoint file")
    if int(version) != CHECKPOINT_VERSION:
        raise VersionMismatch(f"checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    key, dim = next(it).split()
    if key != "dim":
        raise MalformedCheckpoint("missing dim")
    dim = int(dim)

    values = {}
    for f in fields(Hyperparams):
        key, raw = next(it).split()
        if key != f.name:
            raise MalformedCheckpoint(f"expected {f.name!r}, found {key!r}")
        if f.type in (bool, "bool"):
            values[key] = bool(int(raw))
        elif f.type in (int, "int"):
            values[key] = int(raw)
        else:
            values[key] = float(raw)

    if next(it) != "W":
        raise MalformedCheckpoint("missing W block")
    W = [[float(v) for v in next(it).split()] for _ in range(dim)]
    if next(it) != "b":
        raise MalformedCheckpoint("missing b block")
    b = [float(v) for v in next(it).split()]
    if next(it) != "end":
        raise MalformedCheckpoint("missing end marker")
    if any(len(row) != dim for row in W) or len(b) != dim:
        raise MalformedCheckpoint("parameter block does not match dim")
    return AffineTransform(np.array(W), np.array(b)), Hyperparams(**values)
