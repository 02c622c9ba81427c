"""TREC run and qrels files: data types, parsing and serialization.

Run lines have six columns ``query_id Q0 doc_id rank score run_tag``; qrels
lines have four ``query_id iteration doc_id grade``. Text is handled as
8-bit tokens (read files as latin-1) and only ASCII whitespace separates
fields, so doc ids survive a round trip byte for byte.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple, TextIO

from .errors import (
    DuplicateDocument,
    DuplicateJudgment,
    FuselabError,
    InconsistentRunTag,
    MalformedLine,
    NonFiniteScore,
)

_FIELD_SEP = re.compile(r"[ \t\n\r\f\v]+")

# Encoding for run/qrels files: maps every byte to one code point, so str
# ordering equals byte ordering and no byte sequence is rejected.
FILE_ENCODING = "latin-1"


class DocScore(NamedTuple):
    doc_id: str
    rank: int
    score: float


def sort_key(item: tuple[str, float]) -> tuple[float, str]:
    """Key for ``sorted(..., reverse=True)``: score descending, then doc id
    in reverse lexicographic order."""
    return item[1], item[0]


@dataclass(frozen=True)
class RankedList:
    """One query's ranked documents.

    ``depth`` is the maximum length the list may have. It is metadata and is
    not part of equality: a file does not record the depth a run was cut at.
    """

    query_id: str
    entries: tuple[DocScore, ...] = ()
    depth: int = field(default=0, compare=False)

    def __post_init__(self):
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        if self.depth == 0:
            object.__setattr__(self, "depth", max(1, len(self.entries)))
        self._validate()

    def _validate(self):
        if self.depth < 1:
            raise FuselabError(f"depth must be positive, got {self.depth}")
        if len(self.entries) > self.depth:
            raise FuselabError(
                f"list for {self.query_id!r} has {len(self.entries)} entries, depth {self.depth}"
            )
        seen = set()
        prev = None
        for i, (doc_id, rank, score) in enumerate(self.entries, start=1):
            if rank != i:
                raise FuselabError(f"rank {rank} at position {i} for {self.query_id!r}")
            if doc_id in seen:
                raise DuplicateDocument(self.query_id, doc_id)
            if not doc_id or _FIELD_SEP.search(doc_id):
                raise FuselabError(f"invalid doc id {doc_id!r}")
            seen.add(doc_id)
            if not math.isfinite(score):
                raise FuselabError(f"non-finite score for {doc_id!r}")
            if prev is not None and sort_key(prev) < (score, doc_id):
                raise FuselabError(f"entries for {self.query_id!r} are not sorted at rank {i}")
            prev = (doc_id, score)

    @classmethod
    def from_scores(
        cls,
        query_id: str,
        scores: Mapping[str, float] | Iterable[tuple[str, float]],
        depth: int | None = None,
    ) -> RankedList:
        """Build a list from unordered (doc_id, score) pairs.

        Pairs are sorted and ranked; if ``depth`` is given the sorted list is
        truncated to it. Duplicate doc ids in an iterable raise.
        """
        if isinstance(scores, Mapping):
            pairs = list(scores.items())
        else:
            pairs = list(scores)
            if len({d for d, _ in pairs}) != len(pairs):
                seen = set()
                for d, _ in pairs:
                    if d in seen:
                        raise DuplicateDocument(query_id, d)
                    seen.add(d)
        pairs.sort(key=sort_key, reverse=True)
        if depth is not None:
            del pairs[depth:]
        entries = tuple(DocScore(d, r, s) for r, (d, s) in enumerate(pairs, start=1))
        return cls(query_id, entries, depth or 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    @property
    def scores(self) -> list[float]:
        return [e.score for e in self.entries]

    def truncate(self, depth: int) -> RankedList:
        """Top-``depth`` prefix; the result's depth is ``depth``."""
        return RankedList(self.query_id, self.entries[:depth], depth)

    def with_scores(self, scores: Iterable[float]) -> RankedList:
        """Same documents in the same order with replaced scores.

        Callers must pass scores that are non-increasing along the list with
        the same tie structure; the result is validated.
        """
        entries = tuple(DocScore(e.doc_id, e.rank, s) for e, s in zip(self.entries, scores))
        return RankedList(self.query_id, entries, self.depth)


@dataclass(frozen=True)
class Run:
    """A named set of ranked lists keyed by query id."""

    run_tag: str
    lists: Mapping[str, RankedList] = field(default_factory=dict)

    def __post_init__(self):
        for qid, rl in self.lists.items():
            if rl.query_id != qid:
                raise FuselabError(f"list keyed {qid!r} has query_id {rl.query_id!r}")

    def __len__(self) -> int:
        return len(self.lists)

    def query_ids(self) -> list[str]:
        return sorted(self.lists)

    def get(self, query_id: str) -> RankedList:
        """The list for ``query_id``, or an empty list when the run lacks it."""
        rl = self.lists.get(query_id)
        return rl if rl is not None else RankedList(query_id)


@dataclass(frozen=True)
class Qrels:
    """Graded relevance judgments keyed by (query_id, doc_id)."""

    judgments: Mapping[tuple[str, str], int] = field(default_factory=dict)
    _by_query: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_query: dict[str, dict[str, int]] = {}
        for (qid, did), grade in self.judgments.items():
            by_query.setdefault(qid, {})[did] = grade
        object.__setattr__(self, "_by_query", by_query)

    @classmethod
    def from_query_map(cls, by_query: Mapping[str, Mapping[str, int]]) -> Qrels:
        return cls({(q, d): g for q, docs in by_query.items() for d, g in docs.items()})

    def __len__(self) -> int:
        return len(self.judgments)

    def __contains__(self, key) -> bool:
        return key in self.judgments

    def query_ids(self) -> list[str]:
        return sorted(self._by_query)

    def for_query(self, query_id: str) -> Mapping[str, int]:
        return self._by_query.get(query_id, {})

    def num_relevant(self, query_id: str, threshold: int = 1) -> int:
        return sum(1 for g in self.for_query(query_id).values() if g >= threshold)


# -- parsing ------------------------------------------------------------------


def _lines(text: str | TextIO) -> Iterable[str]:
    # only "\n" ends a line; str.splitlines would also split on 0x85 etc.
    if isinstance(text, str):
        return text.split("\n")
    return text


def _fields(line: str) -> list[str]:
    return [f for f in _FIELD_SEP.split(line) if f]


def parse_run(text: str | TextIO) -> Run:
    """Parse a TREC run.

    Input ranks are discarded; each query's entries are re-sorted by score
    (ties: reverse lexicographic doc id) and re-ranked.
    """
    by_query: dict[str, dict[str, float]] = {}
    run_tag = None
    for line_no, line in enumerate(_lines(text), start=1):
        fields = _fields(line)
        if not fields:
            continue
        if len(fields) != 6:
            raise MalformedLine(line_no, f"expected 6 fields, found {len(fields)}")
        qid, q0, doc_id, rank, score, tag = fields
        if q0.upper() != "Q0":
            raise MalformedLine(line_no, f"second field must be Q0, found {q0!r}")
        try:
            int(rank)
            value = float(score)
        except ValueError:
            raise MalformedLine(line_no, "unparseable rank or score") from None
        if not math.isfinite(value):
            raise NonFiniteScore(line_no)
        if run_tag is None:
            run_tag = tag
        elif tag != run_tag:
            raise InconsistentRunTag(line_no)
        docs = by_query.setdefault(qid, {})
        if doc_id in docs:
            raise DuplicateDocument(qid, doc_id)
        docs[doc_id] = value
    lists = {qid: RankedList.from_scores(qid, docs) for qid, docs in by_query.items()}
    return Run(run_tag or "", lists)


def parse_qrels(text: str | TextIO) -> Qrels:
    """Parse a qrels file. Identical duplicate lines are tolerated."""
    judgments: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(_lines(text), start=1):
        fields = _fields(line)
        if not fields:
            continue
        if len(fields) != 4:
            raise MalformedLine(line_no, f"expected 4 fields, found {len(fields)}")
        qid, _, doc_id, grade = fields
        try:
            g = int(grade)
        except ValueError:
            raise MalformedLine(line_no, f"grade {grade!r} is not an integer") from None
        key = (qid, doc_id)
        if judgments.get(key, g) != g:
            raise DuplicateJudgment(qid, doc_id)
        judgments[key] = g
    return Qrels(judgments)


# -- writing ------------------------------------------------------------------


def format_score(score: float) -> str:
    # repr is the shortest string that parses back to the same double
    return repr(float(score))


def write_run(run: Run, out: TextIO | None = None) -> str:
    """Serialize ``run``; returns the text and also writes it to ``out`` if given."""
    tag = run.run_tag
    parts = []
    for qid in sorted(run.lists):
        for doc_id, rank, score in run.lists[qid].entries:
            parts.append(f"{qid} Q0 {doc_id} {rank} {format_score(score)} {tag}\n")
    text = "".join(parts)
    if out is not None:
        out.write(text)
    return text


def write_qrels(qrels: Qrels, out: TextIO | None = None) -> str:
    """Serialize ``qrels`` sorted by query id then doc id, iteration ``0``."""
    lines = [f"{q} 0 {d} {g}\n" for (q, d), g in sorted(qrels.judgments.items())]
    text = "".join(lines)
    if out is not None:
        out.write(text)
    return text


def read_run(path) -> Run:
    with open(path, encoding=FILE_ENCODING, newline="\n") as fh:
        return parse_run(fh)


def read_qrels(path) -> Qrels:
    with open(path, encoding=FILE_ENCODING, newline="\n") as fh:
        return parse_qrels(fh)
