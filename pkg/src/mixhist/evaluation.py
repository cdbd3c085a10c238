"""Retrieval benchmark: query sampling, precision/recall at N, P-R curve
data and the quantization sweep.

Precision at N is ``I_N / N`` and recall ``I_N / M``, where ``I_N`` counts
same-category images among the top N results (the query itself included)
and ``M`` is the size of the query's category in the database.

Query sampling uses numpy's PCG64 generator seeded with ``rng_seed``. Each
category, taken in order of first appearance in the manifest, draws a
permutation of its members (manifest order) and keeps the first
``queries_per_category``. This procedure is part of the reproducibility
contract and must not change between versions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .descriptor import COLOR_PRESETS, QuantizationScheme, features_from_angles, orientation_angles
from .errors import CategoryTooSmall, ExtractionError, UnknownCategory
from .imaging import load_image, rgb_to_hsv
from .index import FeatureDB, ManifestEntry
from .query import CANONICAL, METRIC_MODES, RankedResult, rank


@dataclass(frozen=True)
class EvalConfig:
    n_retrieved: int = 12
    queries_per_category: int = 20
    rng_seed: int = 42
    metric_mode: str = CANONICAL

    def __post_init__(self):
        if self.n_retrieved < 1:
            raise ValueError("n_retrieved must be >= 1")
        if self.queries_per_category < 1:
            raise ValueError("queries_per_category must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")
        if self.metric_mode not in METRIC_MODES:
            raise ValueError(f"metric_mode must be one of {METRIC_MODES}")


@dataclass(frozen=True)
class QueryOutcome:
    image_id: str
    precision: float
    recall: float
    relevant: int


@dataclass
class EvalReport:
    mean_precision: float
    mean_recall: float
    per_query: list[QueryOutcome]
    config: EvalConfig
    scheme: QuantizationScheme | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("image_id", "precision", "recall"))
        for row in self.per_query:
            w.writerow((row.image_id, repr(row.precision), repr(row.recall)))
        w.writerow(("mean", repr(self.mean_precision), repr(self.mean_recall)))
        return buf.getvalue()

    def to_text(self) -> str:
        c = self.config
        lines = [
            f"metric={c.metric_mode} N={c.n_retrieved} queries={len(self.per_query)} "
            f"per_category={c.queries_per_category} seed={c.rng_seed}",
        ]
        if self.scheme is not None:
            s = self.scheme
            lines.append(f"scheme: n_h={s.n_h} n_s={s.n_s} n_v={s.n_v} n_q={s.n_q} (length {s.length})")
        lines.append(f"precision={self.mean_precision:.4f} recall={self.mean_recall:.4f}")
        return "\n".join(lines)


def _group_by_category(entries) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for e in entries:
        groups.setdefault(e.category, []).append(e.image_id)
    return groups


def sample_queries(entries: Sequence[ManifestEntry], per_category: int, seed: int) -> list[str]:
    """Draw ``per_category`` ids from every category without replacement."""
    if per_category < 1:
        raise ValueError("per_category must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    picked: list[str] = []
    for cat, ids in _group_by_category(entries).items():
        if len(ids) < per_category:
            raise CategoryTooSmall(
                f"category {cat!r} has {len(ids)} images, {per_category} queries requested"
            )
        perm = rng.permutation(len(ids))
        picked.extend(ids[k] for k in perm[:per_category])
    return picked


def precision_recall_at(
    result: RankedResult, query_category: str, db: FeatureDB, n: int
) -> tuple[float, float]:
    relevant_total = db.category_sizes().get(query_category, 0)
    if relevant_total == 0:
        raise UnknownCategory(query_category)
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(result) < min(n, len(db)):
        raise ValueError(f"result holds {len(result)} entries, need {min(n, len(db))}")
    hits = _count_relevant(result, query_category, db, n)
    return hits / n, hits / relevant_total


def _count_relevant(result: RankedResult, category: str, db: FeatureDB, n: int) -> int:
    return sum(1 for iid, _ in result.entries[:n] if db.category(iid) == category)


def _mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else 0.0


def _report(outcomes: list[QueryOutcome], config: EvalConfig, db: FeatureDB) -> EvalReport:
    return EvalReport(
        mean_precision=_mean(o.precision for o in outcomes),
        mean_recall=_mean(o.recall for o in outcomes),
        per_query=outcomes,
        config=config,
        scheme=db.scheme,
    )


def _ranked_queries(db: FeatureDB, config: EvalConfig, entries, depth: int):
    queries = sample_queries(entries, config.queries_per_category, config.rng_seed)
    sizes = db.category_sizes()
    for qid in queries:
        try:
            category = db.category(qid)
        except KeyError:
            raise UnknownCategory(f"query {qid!r} is not in the database") from None
        result = rank(db, db.vector(qid), depth, config.metric_mode)
        yield qid, category, sizes[category], result


def run_benchmark(db: FeatureDB, config: EvalConfig, entries: Sequence[ManifestEntry]) -> EvalReport:
    """Average precision/recall at ``config.n_retrieved`` over sampled queries."""
    n = config.n_retrieved
    outcomes = []
    for qid, category, m, result in _ranked_queries(db, config, entries, n):
        hits = _count_relevant(result, category, db, n)
        outcomes.append(QueryOutcome(qid, hits / n, hits / m, hits))
    return _report(outcomes, config, db)


def pr_curve(
    db: FeatureDB, config: EvalConfig, entries: Sequence[ManifestEntry], n_values: Sequence[int]
) -> list[tuple[int, float, float]]:
    """Mean (recall, precision) for each retrieval depth in ``n_values``.

    Each query is ranked once to the deepest ``n``; shallower points reuse
    the prefix, which equals a fresh ranking because ordering is total.
    """
    n_values = list(n_values)
    if not n_values:
        raise ValueError("n_values must be non-empty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])) or n_values[0] < 1:
        raise ValueError("n_values must be positive and strictly ascending")
    per_n: dict[int, list[tuple[float, float]]] = {n: [] for n in n_values}
    for _, category, m, result in _ranked_queries(db, config, entries, n_values[-1]):
        hits = 0
        k = 0
        for n in n_values:
            while k < min(n, len(result)):
                hits += db.category(result.entries[k][0]) == category
                k += 1
            per_n[n].append((hits / n, hits / m))
    return [
        (n, _mean(r for _, r in per_n[n]), _mean(p for p, _ in per_n[n])) for n in n_values
    ]


def pr_curve_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "recall", "precision"))
    for n, r, p in points:
        w.writerow((n, repr(r), repr(p)))
    return buf.getvalue()


@dataclass
class SweepResult:
    """Mean precision per (n_q, Nc) cell, laid out like a results table."""

    n_q_values: list[int]
    color_presets: list[int]
    precision: np.ndarray  # shape (len(n_q_values), len(color_presets))
    config: EvalConfig
    reports: dict[tuple[int, int], EvalReport] = field(default_factory=dict, repr=False)

    def best_cell(self) -> tuple[int, int]:
        i, j = np.unravel_index(int(np.argmax(self.precision)), self.precision.shape)
        return self.n_q_values[i], self.color_presets[j]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_q", *self.color_presets])
        for i, n_q in enumerate(self.n_q_values):
            w.writerow([n_q, *(repr(float(x)) for x in self.precision[i])])
        return buf.getvalue()


def sweep(
    entries: Sequence[ManifestEntry],
    n_q_values: Sequence[int],
    color_presets: Sequence[int],
    config: EvalConfig = EvalConfig(),
) -> SweepResult:
    """Benchmark every (n_q, color preset) pair on one shared query sample.

    Each image is decoded once; its orientation angles do not depend on the
    scheme and are reused across all cells.
    """
    entries = list(entries)
    n_q_values = list(n_q_values)
    color_presets = list(color_presets)
    if not n_q_values or not color_presets:
        raise ValueError("sweep needs at least one n_q value and one color preset")
    schemes = {
        (n_q, nc): QuantizationScheme.from_preset(nc, n_q)
        for n_q in n_q_values
        for nc in color_presets
    }
    vectors = {cell: np.empty((len(entries), s.length)) for cell, s in schemes.items()}
    for k, e in enumerate(entries):
        try:
            hsv = rgb_to_hsv(load_image(e.path))
        except Exception as exc:
            raise ExtractionError(e.image_id, exc) from exc
        theta = orientation_angles(hsv)
        for cell, s in schemes.items():
            vectors[cell][k] = features_from_angles(hsv, theta, s).values

    ids = [e.image_id for e in entries]
    cats = [e.category for e in entries]
    grid = np.zeros((len(n_q_values), len(color_presets)))
    reports = {}
    for i, n_q in enumerate(n_q_values):
        for j, nc in enumerate(color_presets):
            db = FeatureDB(schemes[n_q, nc], ids, cats, vectors[n_q, nc])
            rep = run_benchmark(db, config, entries)
            reports[n_q, nc] = rep
            grid[i, j] = rep.mean_precision
    return SweepResult(n_q_values, color_presets, grid, config, reports)


__all__ = [
    "COLOR_PRESETS",
    "EvalConfig",
    "EvalReport",
    "QueryOutcome",
    "SweepResult",
    "pr_curve",
    "pr_curve_csv",
    "precision_recall_at",
    "run_benchmark",
    "sample_queries",
    "sweep",
]
