"""Exhaustive simplex grid search for linear-fusion weights."""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus_io import Qrels, Run, format_score
from .errors import EmptyInput, InvalidConfig, NoEvaluableQueries
from .fusion import FusionConfig, _candidates, _prepare, fuse_runs
from .metrics import MetricSpec, evaluate, parse_metric


@dataclass(frozen=True)
class GridSpec:
    step: float = 0.1
    objective: MetricSpec | str = "ndcg@5"

    def __post_init__(self):
        if not (0 < self.step <= 1):
            raise InvalidConfig(f"step must lie in (0, 1], got {self.step}")
        divisions = round(1 / self.step)
        if abs(divisions * self.step - 1) > 1e-9:
            raise InvalidConfig(f"1/step must be an integer, got step {self.step}")
        object.__setattr__(self, "objective", parse_metric(self.objective))

    @property
    def divisions(self) -> int:
        return round(1 / self.step)


def _compositions(parts: int, total: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(parts - 1, total - first):
            yield (first, *rest)


def simplex_lattice(k: int, grid: GridSpec) -> list[tuple[float, ...]]:
    """Weight vectors with coordinates ``m_i / N`` summing to one, in
    lexicographic order of ``(m_1, ..., m_k)``; ``N = 1/step``."""
    n = grid.divisions
    return [tuple(m / n for m in ms) for ms in _compositions(k, n)]


@dataclass(frozen=True)
class TuneReport:
    best_weights: tuple[float, ...]
    best_score: float
    trials: tuple[tuple[tuple[float, ...], float], ...]
    objective: str

    def to_lines(self) -> str:
        def weights(ws):
            return ",".join(format_score(w) for w in ws)

        lines = [f"# best\t{weights(self.best_weights)}\t{format_score(self.best_score)}\t{self.objective}\n"]
        lines += [f"{weights(ws)}\t{format_score(v)}\n" for ws, v in self.trials]
        return "".join(lines)


class _QueryTable:
    """Weight-independent fusion state of one query: candidate scores per
    list (backfilled), tie-break order, and grades."""

    def __init__(self, lists, config: FusionConfig, judged, num_relevant):
        prepared = _prepare(lists, config)
        docs = list(_candidates(prepared))
        matrix = np.empty((len(docs), len(prepared)))
        for n, rl in enumerate(prepared):
            table = {e.doc_id: e.score for e in rl.entries}
            floor = rl.entries[-1].score if rl.entries else 0.0
            matrix[:, n] = [table.get(d, floor) for d in docs]
        # position of each doc in reverse lexicographic order
        tie = np.empty(len(docs), dtype=np.int64)
        for pos, i in enumerate(sorted(range(len(docs)), key=docs.__getitem__, reverse=True)):
            tie[i] = pos
        self.columns = [matrix[:, n] for n in range(matrix.shape[1])]
        self.tie = tie
        self.grades = [judged.get(d) for d in docs]
        self.judged = judged
        self.num_relevant = num_relevant

    def ranked_grades(self, weights, cut: int) -> list:
        total = np.zeros(len(self.tie))
        for w, col in zip(weights, self.columns):
            total = total + w * col
        order = np.lexsort((self.tie, -total))[:cut]
        return [self.grades[i] for i in order]


def grid_search(
    runs: Sequence[Run],
    qrels: Qrels,
    grid: GridSpec,
    fusion_base: FusionConfig | None = None,
) -> TuneReport:
    """Evaluate linear fusion at every point of the weight simplex lattice.

    The result equals running ``fuse_runs`` and ``evaluate`` per point; the
    weight-independent work is done once per query. The best point is the
    first maximizer in lattice order.
    """
    if len(runs) < 2:
        raise EmptyInput("grid search needs at least two runs")
    base = dataclasses.replace(fusion_base or FusionConfig(), method="linear", weights=None)
    spec: MetricSpec = grid.objective
    cut = base.output_depth if spec.k is None else min(spec.k, base.output_depth)

    query_ids = sorted(set().union(*(r.lists for r in runs)))
    tables = []
    for qid in query_ids:
        num_rel = qrels.num_relevant(qid)
        if num_rel == 0:
            continue
        tables.append(_QueryTable([r.get(qid) for r in runs], base, qrels.for_query(qid), num_rel))
    if not tables:
        raise NoEvaluableQueries("no query of the runs has a relevant judgment")

    trials = []
    for weights in simplex_lattice(len(runs), grid):
        values = [
            spec.compute(t.ranked_grades(weights, cut), t.judged, t.num_relevant) for t in tables
        ]
        trials.append((weights, math.fsum(values) / len(values)))
    best_weights, best_score = trials[0]
    for weights, value in trials[1:]:
        if value > best_score:
            best_weights, best_score = weights, value
    return TuneReport(best_weights, best_score, tuple(trials), spec.label)


def evaluate_weights(runs, qrels, weights, objective, fusion_base=None) -> float:
    """Objective of one weight vector via the regular fusion path."""
    config = dataclasses.replace(fusion_base or FusionConfig(), method="linear", weights=tuple(weights))
    spec = parse_metric(objective)
    report = evaluate(fuse_runs(runs, config), qrels, [spec])
    if report.evaluated_query_count == 0:
        raise NoEvaluableQueries("no evaluable queries")
    return report.means[spec.label]

