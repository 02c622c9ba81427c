"""TREC-style retrieval metrics.

Relevance is ``grade >= 1``. NDCG uses linear gain ``max(grade, 0)`` unless
the ``ndcg_exp`` variant (``2**grade - 1``) is requested. Queries without a
relevant judgment, or absent from the run, are left out of the means.

Metric specifications are strings ``name@k``: ``ndcg@10``, ``ndcg_exp@10``,
``recall@100``, ``map@1000`` (``map@1k`` also works), ``judged@20``,
``judged_count@20`` and ``mrr`` or ``mrr@k``.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from .corpus_io import Qrels, RankedList, Run
from .errors import FuselabError, UnknownMetric

RELEVANT = 1


class NoRelevantDocs(FuselabError):
    """Raised by recall and MAP when the query has no relevant judgment."""


# -- per-query cores over grade sequences --------------------------------------
#
# ``grades`` holds the qrels grade of each retrieved doc in rank order, None
# when unjudged. These are shared with the tuner's vectorized search.


@lru_cache(maxsize=None)
def _discount(rank: int) -> float:
    return math.log2(rank + 1)


def gain(grade: int | None, exponential: bool = False) -> float:
    if grade is None or grade <= 0:
        return 0.0
    return float(2**grade - 1) if exponential else float(grade)


def ideal_gains(judged: Mapping[str, int], exponential: bool = False) -> list[float]:
    return sorted((gain(g, exponential) for g in judged.values()), reverse=True)


def dcg(gains: Iterable[float], k: int) -> float:
    total = 0.0
    for r, g in enumerate(gains, start=1):
        if r > k:
            break
        if g:
            total += g / _discount(r)
    return total


def ndcg_from_grades(grades: Sequence, ideal: Sequence[float], k: int, exponential=False) -> float:
    idcg = dcg(ideal, k)
    if idcg == 0:
        return 0.0
    return dcg((gain(g, exponential) for g in grades[:k]), k) / idcg


def rr_from_grades(grades: Sequence, threshold: int = RELEVANT, cutoff: int | None = None) -> float:
    for r, g in enumerate(grades[:cutoff] if cutoff else grades, start=1):
        if g is not None and g >= threshold:
            return 1.0 / r
    return 0.0


def recall_from_grades(grades: Sequence, num_relevant: int, k: int) -> float:
    if num_relevant == 0:
        raise NoRelevantDocs("recall undefined without relevant documents")
    hits = sum(1 for g in grades[:k] if g is not None and g >= RELEVANT)
    return hits / num_relevant


def ap_from_grades(grades: Sequence, num_relevant: int, k: int) -> float:
    if num_relevant == 0:
        raise NoRelevantDocs("average precision undefined without relevant documents")
    hits = 0
    total = 0.0
    for r, g in enumerate(grades[:k], start=1):
        if g is not None and g >= RELEVANT:
            hits += 1
            total += hits / r
    return total / num_relevant


def judged_from_grades(grades: Sequence, k: int) -> tuple[float, int]:
    top = grades[:k]
    count = sum(1 for g in top if g is not None)
    return (count / len(top) if top else 0.0), count


# -- public per-list metrics ---------------------------------------------------


def grades_of(ranked: RankedList, judged: Mapping[str, int]) -> list[int | None]:
    return [judged.get(e.doc_id) for e in ranked.entries]


def ndcg_at_k(ranked: RankedList, qrels: Qrels, k: int, exponential: bool = False) -> float:
    judged = qrels.for_query(ranked.query_id)
    return ndcg_from_grades(grades_of(ranked, judged), ideal_gains(judged, exponential), k, exponential)


def mrr(ranked: RankedList, qrels: Qrels, threshold: int = RELEVANT, cutoff: int | None = None) -> float:
    """Reciprocal rank of the first document graded at least ``threshold``
    within ``cutoff`` (default: the whole list)."""
    judged = qrels.for_query(ranked.query_id)
    return rr_from_grades(grades_of(ranked, judged), threshold, cutoff)


def recall_at_k(ranked: RankedList, qrels: Qrels, k: int) -> float:
    judged = qrels.for_query(ranked.query_id)
    return recall_from_grades(grades_of(ranked, judged), qrels.num_relevant(ranked.query_id), k)


def map_at_k(ranked: RankedList, qrels: Qrels, k: int) -> float:
    """Average precision at cutoff ``k``, normalized by all relevant
    documents of the query (not by ``min(k, R)``)."""
    judged = qrels.for_query(ranked.query_id)
    return ap_from_grades(grades_of(ranked, judged), qrels.num_relevant(ranked.query_id), k)


def judged_at_k(ranked: RankedList, qrels: Qrels, k: int) -> tuple[float, int]:
    """(fraction, count) of the top ``k`` documents having any judgment."""
    judged = qrels.for_query(ranked.query_id)
    return judged_from_grades(grades_of(ranked, judged), k)


# -- metric specifications -------------------------------------------------------

_SPEC = re.compile(r"^([a-z_]+)(?:@(\d+)(k?))?$")
_NEEDS_CUTOFF = {"ndcg", "ndcg_exp", "recall", "map", "judged", "judged_count"}
COUNT_METRICS = {"judged_count"}


@dataclass(frozen=True)
class MetricSpec:
    name: str
    k: int | None = None

    @property
    def label(self) -> str:
        return self.name if self.k is None else f"{self.name}@{self.k}"

    def __str__(self) -> str:
        return self.label

    @property
    def is_count(self) -> bool:
        return self.name in COUNT_METRICS

    def compute(self, grades: Sequence, judged: Mapping[str, int], num_relevant: int) -> float:
        """Value for one query from its retrieved grades and judgments."""
        name, k = self.name, self.k
        if name == "ndcg":
            return ndcg_from_grades(grades, ideal_gains(judged), k)
        if name == "ndcg_exp":
            return ndcg_from_grades(grades, ideal_gains(judged, True), k, True)
        if name == "mrr":
            return rr_from_grades(grades, RELEVANT, k)
        if name == "recall":
            return recall_from_grades(grades, num_relevant, k)
        if name == "map":
            return ap_from_grades(grades, num_relevant, k)
        if name == "judged":
            return judged_from_grades(grades, k)[0]
        if name == "judged_count":
            return float(judged_from_grades(grades, k)[1])
        raise UnknownMetric(name)

    def value(self, ranked: RankedList, qrels: Qrels) -> float:
        judged = qrels.for_query(ranked.query_id)
        return self.compute(grades_of(ranked, judged), judged, qrels.num_relevant(ranked.query_id))


def parse_metric(text: str | MetricSpec) -> MetricSpec:
    if isinstance(text, MetricSpec):
        return text
    m = _SPEC.match(text.strip().lower())
    if not m:
        raise UnknownMetric(text)
    name, k, thousands = m.groups()
    if name not in _NEEDS_CUTOFF and name != "mrr":
        raise UnknownMetric(text)
    if k is None:
        if name in _NEEDS_CUTOFF:
            raise UnknownMetric(text)
        return MetricSpec(name)
    cutoff = int(k) * (1000 if thousands else 1)
    if cutoff < 1:
        raise UnknownMetric(text)
    return MetricSpec(name, cutoff)


def parse_metrics(texts: str | Iterable[str | MetricSpec]) -> list[MetricSpec]:
    if isinstance(texts, str):
        texts = [t for t in texts.split(",") if t.strip()]
    specs: list[MetricSpec] = []
    for t in texts:
        spec = parse_metric(t)
        if spec not in specs:
            specs.append(spec)
    return specs


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class MetricReport:
    per_query: dict[str, dict[str, float]]
    means: dict[str, float]
    evaluated_query_count: int
    skipped_query_ids: frozenset[str] = field(default_factory=frozenset)
    metrics: tuple[str, ...] = ()

    def _fmt(self, metric: str, value: float, percent: bool) -> str:
        if metric.split("@")[0] in COUNT_METRICS:
            return str(int(value)) if value.is_integer() else f"{value:.4f}"
        return f"{value * 100:.2f}" if percent else f"{value:.4f}"

    def to_lines(self, percent: bool = False) -> str:
        """``query_id<TAB>metric<TAB>value`` lines; means use query id ``all``."""
        out = []
        for qid in sorted(self.per_query):
            for m in self.metrics:
                out.append(f"{qid}\t{m}\t{self._fmt(m, self.per_query[qid][m], percent)}\n")
        for m in self.metrics:
            out.append(f"all\t{m}\t{self._fmt(m, self.means[m], percent)}\n")
        return "".join(out)

    def to_table(self, percent: bool = False) -> str:
        rows = [["query", *self.metrics]]
        for qid in sorted(self.per_query):
            rows.append([qid, *(self._fmt(m, self.per_query[qid][m], percent) for m in self.metrics)])
        rows.append(["all", *(self._fmt(m, self.means[m], percent) for m in self.metrics)])
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = []
        for row in rows:
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip() + "\n")
        return "".join(lines)


def evaluate(run: Run, qrels: Qrels, metrics: Iterable[str | MetricSpec]) -> MetricReport:
    """Per-query and mean metrics for every query in both ``run`` and
    ``qrels`` that has at least one relevant judgment."""
    specs = parse_metrics(metrics)
    labels = tuple(s.label for s in specs)
    per_query: dict[str, dict[str, float]] = {}
    skipped = set()
    for qid in sorted(set(run.lists) | set(qrels.query_ids())):
        num_rel = qrels.num_relevant(qid)
        if qid not in run.lists or num_rel == 0:
            skipped.add(qid)
            continue
        judged = qrels.for_query(qid)
        grades = grades_of(run.lists[qid], judged)
        per_query[qid] = {s.label: s.compute(grades, judged, num_rel) for s in specs}
    n = len(per_query)
    means = {
        label: (math.fsum(v[label] for v in per_query.values()) / n if n else 0.0)
        for label in labels
    }
    return MetricReport(per_query, means, n, frozenset(skipped), labels)
