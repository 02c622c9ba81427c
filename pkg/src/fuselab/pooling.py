"""Judgment pools and assessment-bias diagnostics.

Assessment is modeled as restricting a ground-truth ("oracle") qrels to the
documents of a depth-``d`` pool. Holding one run out of the pool shows how
much of that run's evaluation depends on its own contribution to the pool.
"""

from __future__ import annotations

import math
import statistics
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .corpus_io import Qrels, RankedList, Run
from .errors import EmptyInput, InvalidConfig, MalformedLine, UnknownRunTag
from .metrics import MetricReport, MetricSpec, NoRelevantDocs, evaluate, judged_at_k, parse_metric


@dataclass(frozen=True)
class Pool:
    depth: int
    members: dict[str, frozenset[str]] = field(default_factory=dict)
    contributors: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return sum(len(m) for m in self.members.values())

    def to_lines(self) -> str:
        """``query_id<TAB>doc_id`` lines sorted by query then doc."""
        return "".join(
            f"{q}\t{d}\n" for q in sorted(self.members) for d in sorted(self.members[q])
        )


def build_pool(runs: Sequence[Run], depth: int) -> Pool:
    """Union of every run's top-``depth`` documents, per query."""
    if not runs:
        raise EmptyInput("no runs to pool")
    if depth < 1:
        raise InvalidConfig(f"pool depth must be positive, got {depth}")
    members: dict[str, set[str]] = {}
    for run in runs:
        for qid, ranked in run.lists.items():
            members.setdefault(qid, set()).update(e.doc_id for e in ranked.entries[:depth])
    return Pool(
        depth,
        {q: frozenset(docs) for q, docs in members.items()},
        frozenset(r.run_tag for r in runs),
    )


def parse_pool(text: str, depth: int = 1) -> Pool:
    """Read ``Pool.to_lines`` output. The depth is not stored in the file."""
    members: dict[str, set[str]] = {}
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not all(parts):
            raise MalformedLine(line_no, "expected query_id<TAB>doc_id")
        members.setdefault(parts[0], set()).add(parts[1])
    return Pool(depth, {q: frozenset(d) for q, d in members.items()})


def simulate_qrels(pool: Pool, oracle_qrels: Qrels) -> Qrels:
    """The judgments an assessor would produce by labeling exactly the pool."""
    kept = {}
    for (qid, doc_id), grade in oracle_qrels.judgments.items():
        docs = pool.members.get(qid)
        if docs is not None and doc_id in docs:
            kept[(qid, doc_id)] = grade
    return Qrels(kept)


@dataclass(frozen=True)
class BiasRow:
    with_full_pool: float
    without_target: float
    judged_count_delta: int


@dataclass(frozen=True)
class BiasReport:
    target_tag: str
    objective: str
    depth: int
    per_query: dict[str, BiasRow]
    means: BiasRow | None = None

    def to_lines(self) -> str:
        lines = [f"query\t{self.objective}_full\t{self.objective}_without\tjudged_delta\n"]
        for qid in sorted(self.per_query):
            r = self.per_query[qid]
            lines.append(f"{qid}\t{r.with_full_pool:.4f}\t{r.without_target:.4f}\t{r.judged_count_delta}\n")
        if self.means is not None:
            m = self.means
            lines.append(f"all\t{m.with_full_pool:.4f}\t{m.without_target:.4f}\t{m.judged_count_delta:.4f}\n")
        return "".join(lines)


def _metric_or_zero(spec: MetricSpec, ranked: RankedList, qrels: Qrels) -> float:
    try:
        return spec.value(ranked, qrels)
    except NoRelevantDocs:
        # nothing relevant survives in the pool: every normalized metric is 0
        return 0.0


def leave_one_out_bias(
    runs: Sequence[Run],
    target_tag: str,
    oracle_qrels: Qrels,
    depth: int,
    objective: str | MetricSpec = "recall@20",
) -> BiasReport:
    """Evaluate the target run against pools built with and without it.

    Reported per query of the target run that has a relevant oracle
    judgment. ``judged_count_delta`` is the drop in judged@depth of the
    target run when its own documents leave the pool.
    """
    spec = parse_metric(objective)
    target = next((r for r in runs if r.run_tag == target_tag), None)
    if target is None:
        raise UnknownRunTag(target_tag)
    others = [r for r in runs if r is not target]
    full = simulate_qrels(build_pool(runs, depth), oracle_qrels)
    if others:
        reduced = simulate_qrels(build_pool(others, depth), oracle_qrels)
    else:
        reduced = Qrels()

    per_query = {}
    for qid in sorted(target.lists):
        if oracle_qrels.num_relevant(qid) == 0:
            continue
        ranked = target.lists[qid]
        delta = judged_at_k(ranked, full, depth)[1] - judged_at_k(ranked, reduced, depth)[1]
        per_query[qid] = BiasRow(
            _metric_or_zero(spec, ranked, full), _metric_or_zero(spec, ranked, reduced), delta
        )
    means = None
    if per_query:
        rows = list(per_query.values())
        n = len(rows)
        means = BiasRow(
            math.fsum(r.with_full_pool for r in rows) / n,
            math.fsum(r.without_target for r in rows) / n,
            sum(r.judged_count_delta for r in rows) / n,
        )
    return BiasReport(target_tag, spec.label, depth, per_query, means)


def condense(run: Run, qrels: Qrels) -> Run:
    """Drop unjudged documents from every list, closing the rank gaps."""
    lists = {}
    for qid, ranked in run.lists.items():
        judged = qrels.for_query(qid)
        kept = [(e.doc_id, e.score) for e in ranked.entries if e.doc_id in judged]
        lists[qid] = RankedList.from_scores(qid, kept, ranked.depth)
    return Run(run.run_tag, lists)


def condensed_eval(run: Run, qrels: Qrels, metrics: Iterable[str | MetricSpec]) -> MetricReport:
    return evaluate(condense(run, qrels), qrels, metrics)


@dataclass(frozen=True)
class CollectionStats:
    query_count: int
    judged_pairs: int
    relevant_pairs: int
    judged_per_query: dict[str, float]  # min / median / mean / max
    run_judged: dict[str, dict[int, tuple[float, float]]]  # tag -> k -> (mean fraction, mean count)
    ks: tuple[int, ...] = (10, 20, 100)

    def to_lines(self) -> str:
        d = self.judged_per_query
        lines = [
            "statistic\tvalue\n",
            f"queries\t{self.query_count}\n",
            f"judged_pairs\t{self.judged_pairs}\n",
            f"relevant_pairs\t{self.relevant_pairs}\n",
        ]
        for key in ("min", "median", "mean", "max"):
            lines.append(f"judged_per_query_{key}\t{d[key]:g}\n")
        if self.run_judged:
            lines.append("run\t" + "\t".join(f"judged@{k}\tjudged_count@{k}" for k in self.ks) + "\n")
            for tag in sorted(self.run_judged):
                cells = []
                for k in self.ks:
                    frac, count = self.run_judged[tag][k]
                    cells += [f"{frac:.4f}", f"{count:.2f}"]
                lines.append(tag + "\t" + "\t".join(cells) + "\n")
        return "".join(lines)


def collection_stats(runs: Sequence[Run], qrels: Qrels, ks: Sequence[int] = (10, 20, 100)) -> CollectionStats:
    """Collection-level counts plus each run's mean judged@k.

    Run means are taken over the run's queries that appear in the qrels.
    """
    counts = [len(qrels.for_query(q)) for q in qrels.query_ids()]
    if counts:
        dist = {
            "min": float(min(counts)),
            "median": float(statistics.median(counts)),
            "mean": sum(counts) / len(counts),
            "max": float(max(counts)),
        }
    else:
        dist = dict.fromkeys(("min", "median", "mean", "max"), 0.0)
    judged_queries = set(qrels.query_ids())
    run_judged = {}
    for run in runs:
        qids = [q for q in sorted(run.lists) if q in judged_queries]
        per_k = {}
        for k in ks:
            values = [judged_at_k(run.lists[q], qrels, k) for q in qids]
            if values:
                per_k[k] = (
                    math.fsum(v[0] for v in values) / len(values),
                    sum(v[1] for v in values) / len(values),
                )
            else:
                per_k[k] = (0.0, 0.0)
        run_judged[run.run_tag] = per_k
    relevant = sum(1 for g in qrels.judgments.values() if g >= 1)
    return CollectionStats(len(counts), len(qrels), relevant, dist, run_judged, tuple(ks))
