"""Mean-offset Canberra-style distance and ranked linear-scan retrieval."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .descriptor import FeatureVector
from .errors import DimensionMismatch, SchemeMismatch
from .index import FeatureDB

CANONICAL = "canonical"
LITERAL = "literal"
METRIC_MODES = (CANONICAL, LITERAL)


def _check_mode(mode: str) -> None:
    if mode not in METRIC_MODES:
        raise ValueError(f"unknown metric mode {mode!r}; expected one of {METRIC_MODES}")


def distances(targets, query, mode: str = CANONICAL) -> np.ndarray:
    """Distance from ``query`` to every row of ``targets``.

    canonical: sum |T - Q| / (|T + mean(T)| + |Q + mean(Q)|)
    literal:   sum |T - Q| / (|T + mean(T)| + |Q - mean(Q)|)

    Terms whose denominator is zero contribute nothing.
    """
    _check_mode(mode)
    t = np.asarray(targets, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    if t.ndim != 2 or q.ndim != 1:
        raise DimensionMismatch("targets must be 2-D and query 1-D")
    if q.shape[0] == 0:
        raise DimensionMismatch("feature vectors must be non-empty")
    if t.shape[1] != q.shape[0]:
        raise DimensionMismatch(f"length mismatch: {t.shape[1]} vs {q.shape[0]}")
    if t.shape[0] == 0:
        return np.zeros(0)

    u_t = t.mean(axis=1, keepdims=True)
    # same reduction path as u_t, so distance(a, b) == distance(b, a) exactly
    u_q = q[None, :].mean(axis=1, keepdims=True)
    q_off = q + u_q if mode == CANONICAL else q - u_q
    num = np.abs(t - q)
    den = np.abs(t + u_t) + np.abs(q_off)
    terms = np.divide(num, den, out=np.zeros_like(num), where=den != 0)
    return terms.sum(axis=1)


def distance(t, q, mode: str = CANONICAL) -> float:
    t = np.asarray(t, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if t.ndim != 1 or t.shape != q.shape:
        raise DimensionMismatch(f"vectors must be 1-D and of equal length, got {t.shape} and {q.shape}")
    return float(distances(t[None, :], q, mode)[0])


@dataclass(frozen=True)
class RankedResult:
    """Ordered (image_id, distance) pairs; ties ordered by image_id."""

    entries: tuple[tuple[str, float], ...]
    metric: str = CANONICAL
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    @property
    def image_ids(self) -> list[str]:
        return [iid for iid, _ in self.entries]


def rank(db: FeatureDB, query_vec, n: int = 12, mode: str = CANONICAL) -> RankedResult:
    """Top-``n`` records by ascending distance (exhaustive scan).

    The query image is not excluded: if it is in the database it ranks
    first with distance 0.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if isinstance(query_vec, FeatureVector) and query_vec.scheme != db.scheme:
        raise SchemeMismatch(f"query scheme {query_vec.scheme} != database scheme {db.scheme}")
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (db.scheme.length,):
        raise SchemeMismatch(
            f"query vector has length {q.shape}, database expects {db.scheme.length}"
        )
    if len(db) == 0:
        return RankedResult((), mode)
    d = distances(db.vectors, q, mode)
    order = np.lexsort((db.id_rank, d))[:n]
    ids = db.image_ids
    return RankedResult(tuple((ids[k], float(d[k])) for k in order), mode)
