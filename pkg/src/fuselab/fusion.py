"""Per-query rank fusion.

The linear method scores each candidate as ``sum_n w_n * S_n(D)`` where a
document missing from list ``n`` takes the score of that list's last
(depth-th) document. The remaining methods are the usual baselines:
CombSUM, CombMNZ, reciprocal rank fusion, Borda count, sort-based Condorcet
and round robin.

All methods take the K ranked lists of a single query and return a new
``RankedList``; ``fuse_runs`` applies one configuration to every query of a
set of runs.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Sequence
from dataclasses import dataclass

from .corpus_io import DocScore, RankedList, Run
from .errors import EmptyInput, FuselabError, InvalidConfig, WeightArityMismatch

METHODS = ("linear", "combsum", "combmnz", "rrf", "borda", "condorcet", "roundrobin")
NORMALIZATIONS = ("none", "minmax", "zscore", "rank")

_DEFAULT_NORMALIZATION = {"combsum": "minmax", "combmnz": "minmax"}


@dataclass(frozen=True)
class FusionConfig:
    """Fusion method and its parameters.

    ``normalization=None`` selects the method default (``minmax`` for
    combsum/combmnz, ``none`` otherwise); ``output_depth=None`` means
    ``depth``. For ``linear``, ``weights=None`` gives every list weight 1.
    """

    method: str = "linear"
    weights: tuple[float, ...] | None = None
    depth: int = 1000
    normalization: str | None = None
    rrf_k: float = 60.0
    output_depth: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidConfig(f"unknown fusion method {self.method!r}")
        if self.normalization is None:
            object.__setattr__(
                self, "normalization", _DEFAULT_NORMALIZATION.get(self.method, "none")
            )
        if self.normalization not in NORMALIZATIONS:
            raise InvalidConfig(f"unknown normalization {self.normalization!r}")
        if self.output_depth is None:
            object.__setattr__(self, "output_depth", self.depth)
        if isinstance(self.depth, bool) or not isinstance(self.depth, int) or self.depth < 1:
            raise InvalidConfig(f"depth must be a positive integer, got {self.depth!r}")
        if not isinstance(self.output_depth, int) or self.output_depth < 1:
            raise InvalidConfig(f"output_depth must be a positive integer, got {self.output_depth!r}")
        if not (self.rrf_k > 0 and math.isfinite(self.rrf_k)):
            raise InvalidConfig(f"rrf_k must be positive, got {self.rrf_k!r}")
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            if any(not math.isfinite(w) or w < 0 for w in weights):
                raise InvalidConfig("weights must be finite and non-negative")
            if not any(w > 0 for w in weights):
                raise InvalidConfig("at least one weight must be positive")
            object.__setattr__(self, "weights", weights)

    def weights_for(self, k: int) -> tuple[float, ...]:
        if self.weights is None:
            return (1.0,) * k
        if len(self.weights) != k:
            raise WeightArityMismatch(len(self.weights), k)
        return self.weights


def normalize_scores(ranked: RankedList, normalization: str) -> RankedList:
    """Rescale the scores of one list.

    ``minmax`` maps to [0, 1] (all 1.0 when every score is equal), ``zscore``
    uses the population standard deviation (all 0.0 when it is zero) and
    ``rank`` replaces scores by ``1 - (rank - 1) / depth``.
    """
    if normalization == "none" or not ranked.entries:
        return ranked
    scores = ranked.scores
    if normalization == "minmax":
        lo, hi = min(scores), max(scores)
        if hi == lo:
            new = [1.0] * len(scores)
        else:
            span = hi - lo
            new = [(s - lo) / span for s in scores]
    elif normalization == "zscore":
        mean = statistics.fmean(scores)
        std = statistics.pstdev(scores)
        new = [0.0] * len(scores) if std == 0 else [(s - mean) / std for s in scores]
    elif normalization == "rank":
        new = [1.0 - (e.rank - 1) / ranked.depth for e in ranked.entries]
    else:
        raise InvalidConfig(f"unknown normalization {normalization!r}")
    # rounding can collapse near-equal scores; re-sorting restores the tie rule
    return RankedList.from_scores(ranked.query_id, zip(ranked.doc_ids, new), ranked.depth)


def _check(lists: Sequence[RankedList]) -> str:
    if not lists:
        raise EmptyInput("no ranked lists to fuse")
    qid = lists[0].query_id
    for rl in lists[1:]:
        if rl.query_id != qid:
            raise FuselabError(f"cannot fuse lists of {qid!r} and {rl.query_id!r}")
    return qid


def _prepare(lists: Sequence[RankedList], config: FusionConfig, normalize=True):
    prepared = [rl.truncate(config.depth) for rl in lists]
    if normalize:
        prepared = [normalize_scores(rl, config.normalization) for rl in prepared]
    return prepared


def _candidates(lists: Sequence[RankedList]) -> dict[str, None]:
    # insertion-ordered union, used as an ordered set
    union: dict[str, None] = {}
    for rl in lists:
        for e in rl.entries:
            union.setdefault(e.doc_id, None)
    return union


def _finish(query_id: str, scores: dict[str, float], config: FusionConfig) -> RankedList:
    return RankedList.from_scores(query_id, scores, config.output_depth)


def _synthetic(query_id: str, order: Sequence[str], n_candidates: int, config) -> RankedList:
    order = order[: config.output_depth]
    entries = tuple(
        DocScore(d, r, float(n_candidates - r + 1)) for r, d in enumerate(order, start=1)
    )
    return RankedList(query_id, entries, config.output_depth)


def linear_fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """Weighted linear combination with depth backfill.

    A document absent from list ``n`` is scored with the last score of that
    list after truncation to ``config.depth`` (0 for an empty list).
    """
    qid = _check(lists)
    weights = config.weights_for(len(lists))
    prepared = _prepare(lists, config)
    tables = [{e.doc_id: e.score for e in rl.entries} for rl in prepared]
    backfill = [rl.entries[-1].score if rl.entries else 0.0 for rl in prepared]
    columns = list(zip(weights, tables, backfill))
    fused = {}
    for doc_id in _candidates(prepared):
        total = 0.0
        for w, table, floor in columns:
            total += w * table.get(doc_id, floor)
        fused[doc_id] = total
    return _finish(qid, fused, config)


def comb_sum(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """Sum of normalized scores; a missing document contributes 0."""
    qid = _check(lists)
    fused: dict[str, float] = {}
    for rl in _prepare(lists, config):
        for e in rl.entries:
            fused[e.doc_id] = fused.get(e.doc_id, 0.0) + e.score
    return _finish(qid, fused, config)


def comb_mnz(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """CombSUM times the number of lists that contain the document."""
    qid = _check(lists)
    total: dict[str, float] = {}
    hits: dict[str, int] = {}
    for rl in _prepare(lists, config):
        for e in rl.entries:
            total[e.doc_id] = total.get(e.doc_id, 0.0) + e.score
            hits[e.doc_id] = hits.get(e.doc_id, 0) + 1
    return _finish(qid, {d: s * hits[d] for d, s in total.items()}, config)


def rrf_fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    qid = _check(lists)
    k = config.rrf_k
    fused: dict[str, float] = {}
    for rl in _prepare(lists, config, normalize=False):
        for e in rl.entries:
            fused[e.doc_id] = fused.get(e.doc_id, 0.0) + 1.0 / (k + e.rank)
    return _finish(qid, fused, config)


def _borda_points(prepared: Sequence[RankedList], universe) -> dict[str, float]:
    n = len(universe)
    points = dict.fromkeys(universe, 0.0)
    for rl in prepared:
        present = set()
        for e in rl.entries:
            points[e.doc_id] += n - e.rank + 1
            present.add(e.doc_id)
        # absent documents split the points of the unfilled positions evenly
        if len(present) < n:
            share = (n - len(rl.entries) + 1) / 2
            for d in universe:
                if d not in present:
                    points[d] += share
    return points


def borda_fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """Borda count over the union of candidates.

    Each list is extended to the full candidate set: rank ``r`` earns
    ``|U| - r + 1`` points and absent documents share the remaining points.
    """
    qid = _check(lists)
    prepared = _prepare(lists, config, normalize=False)
    return _finish(qid, _borda_points(prepared, _candidates(prepared)), config)


def condorcet_fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """Sort-based Condorcet fusion.

    Documents are merge-sorted with a pairwise-majority comparator. Majority
    ties fall back to the lower total rank (absent documents take the mean
    unfilled rank), then to reverse lexicographic doc id. The merge sort
    starts from that fallback order, so the result is deterministic even when
    the majority relation has cycles.
    """
    qid = _check(lists)
    prepared = _prepare(lists, config, normalize=False)
    universe = list(_candidates(prepared))
    n = len(universe)
    ranks = [{e.doc_id: e.rank for e in rl.entries} for rl in prepared]
    rank_sum = dict.fromkeys(universe, 0.0)
    for table, rl in zip(ranks, prepared):
        absent_rank = (len(rl.entries) + 1 + n) / 2
        for d in universe:
            rank_sum[d] += table.get(d, absent_rank)

    def wins(a: str, b: str) -> int:
        count = 0
        for table in ranks:
            ra = table.get(a)
            if ra is not None:
                rb = table.get(b)
                if rb is None or ra < rb:
                    count += 1
        return count

    def precedes(a: str, b: str) -> bool:
        wa, wb = wins(a, b), wins(b, a)
        if wa != wb:
            return wa > wb
        if rank_sum[a] != rank_sum[b]:
            return rank_sum[a] < rank_sum[b]
        return a > b

    start = sorted(universe, key=lambda d: (-rank_sum[d], d), reverse=True)
    return _synthetic(qid, merge_sort(start, precedes), n, config)


def merge_sort(items: list, precedes) -> list:
    """Stable top-down merge sort driven by a ``precedes(a, b)`` predicate."""
    if len(items) <= 1:
        return list(items)
    mid = len(items) // 2
    left = merge_sort(items[:mid], precedes)
    right = merge_sort(items[mid:], precedes)
    out = []
    i = j = 0
    while i < len(left) and j < len(right):
        if precedes(right[j], left[i]):
            out.append(right[j])
            j += 1
        else:
            out.append(left[i])
            i += 1
    out.extend(left[i:])
    out.extend(right[j:])
    return out


def round_robin_fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    qid = _check(lists)
    prepared = _prepare(lists, config, normalize=False)
    emitted: dict[str, None] = {}
    longest = max(len(rl) for rl in prepared)
    for pos in range(longest):
        for rl in prepared:
            if pos < len(rl.entries):
                emitted.setdefault(rl.entries[pos].doc_id, None)
    return _synthetic(qid, list(emitted), len(emitted), config)


FUSERS = {
    "linear": linear_fuse,
    "combsum": comb_sum,
    "combmnz": comb_mnz,
    "rrf": rrf_fuse,
    "borda": borda_fuse,
    "condorcet": condorcet_fuse,
    "roundrobin": round_robin_fuse,
}


def fuse(lists: Sequence[RankedList], config: FusionConfig) -> RankedList:
    """Dispatch to the method named by ``config.method``."""
    return FUSERS[config.method](lists, config)


def fuse_runs(runs: Sequence[Run], config: FusionConfig) -> Run:
    """Fuse every query of ``runs`` with the same configuration.

    A run without a given query contributes an empty list for it.
    """
    if not runs:
        raise EmptyInput("no runs to fuse")
    if config.method == "linear":
        config.weights_for(len(runs))
    fuser = FUSERS[config.method]
    query_ids = sorted(set().union(*(r.lists for r in runs)))
    lists = {q: fuser([r.get(q) for r in runs], config) for q in query_ids}
    return Run(f"fused-{config.method}", lists)
