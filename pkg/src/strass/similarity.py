"""Cosine similarity and its per-document normalizations.

The chain is cos_sim -> cos_plus (rescaled to [0, 1]) -> rcos_plus
(standardized around 0.5 within a sentence set) -> ncos_plus (divided by the
set maximum, so the closest element scores exactly 1).
"""
from typing import NamedTuple

import numpy as np

from .errors import EmptySet, ZeroVector

# below this population std all elements are treated as tied
STD_FLOOR = 1e-12


def cos_sim(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))


def cos_plus(x, y) -> float:
    return (cos_sim(x, y) + 1.0) / 2.0


def cos_sim_many(X, y) -> np.ndarray:
    """Cosine similarity of every row of ``X`` against ``y``."""
    X = _as_set(X)
    y = np.asarray(y, dtype=np.float64)
    row_norms = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(y)
    if ny == 0.0 or np.any(row_norms == 0.0):
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    return np.clip((X @ y) / (row_norms * ny), -1.0, 1.0)


class Chain(NamedTuple):
    """Every stage of the normalization for one sentence set."""

    cos: np.ndarray
    plus: np.ndarray
    mean: float
    std: float
    rcos: np.ndarray
    ncos: np.ndarray
    argmax: int

    @property
    def tied(self) -> bool:
        return self.std < STD_FLOOR


def similarity_chain(X, y) -> Chain:
    cos = cos_sim_many(X, y)
    plus = (cos + 1.0) / 2.0
    mean = float(plus.mean())
    std = float(plus.std())
    if std < STD_FLOOR:
        rcos = np.full_like(plus, 0.5)
    else:
        rcos = 0.5 + (plus - mean) / std
    argmax = int(np.argmax(rcos))
    return Chain(cos, plus, mean, std, rcos, rcos / rcos[argmax], argmax)


def rcos_plus(X, y) -> np.ndarray:
    """cos_plus of each row of ``X`` against ``y``, centred on 0.5 with unit std.

    Uses the population standard deviation. A set whose scores are all tied
    (std below ``STD_FLOOR``) scores 0.5 everywhere.
    """
    return similarity_chain(X, y).rcos


def ncos_plus(X, y) -> np.ndarray:
    """rcos_plus divided by its maximum; the argmax row scores exactly 1.

    The maximum is at least 0.5 by construction, so the division never
    changes sign.
    """
    return similarity_chain(X, y).ncos


def _as_set(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptySet("expected a nonempty set of embeddings")
    return X
