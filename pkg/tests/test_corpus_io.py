import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuselab.corpus_io import (
    DocScore,
    Qrels,
    RankedList,
    Run,
    parse_qrels,
    parse_run,
    read_run,
    write_qrels,
    write_run,
)
from fuselab.errors import (
    DuplicateDocument,
    DuplicateJudgment,
    FuselabError,
    InconsistentRunTag,
    MalformedLine,
    NonFiniteScore,
)


def pairs(ranked):
    return [(e.doc_id, e.score) for e in ranked.entries]


def test_parse_run_basic():
    run = parse_run("q1 Q0 dA 1 10.5 sys\nq1 Q0 dB 2 9.0 sys")
    assert run.run_tag == "sys"
    assert pairs(run.lists["q1"]) == [("dA", 10.5), ("dB", 9.0)]
    assert [e.rank for e in run.lists["q1"]] == [1, 2]


def test_parse_run_recomputes_ranks():
    run = parse_run("q1 Q0 dA 2 1.0 sys\nq1 Q0 dB 1 5.0 sys")
    assert run.lists["q1"].entries == (DocScore("dB", 1, 5.0), DocScore("dA", 2, 1.0))


def test_parse_run_tie_break_reverse_lexicographic():
    run = parse_run("q1 Q0 dA 1 3.0 sys\nq1 Q0 dB 2 3.0 sys")
    assert run.lists["q1"].doc_ids == ["dB", "dA"]


def test_parse_run_tie_break_is_bytewise():
    # 'Z' (0x5a) sorts below 'a' (0x61); 0xe9 above both
    run = parse_run("q Q0 a 1 1 t\nq Q0 Z 2 1 t\nq Q0 \xe9 3 1 t\n")
    assert run.lists["q"].doc_ids == ["\xe9", "a", "Z"]


def test_parse_run_whitespace_and_case():
    text = "q1\tq0   dA  7   2.5\tsys  \r\n\n  q1 Q0 dB 3 1.5 sys\n\n\n"
    run = parse_run(text)
    assert pairs(run.lists["q1"]) == [("dA", 2.5), ("dB", 1.5)]


def test_parse_run_from_stream():
    assert parse_run(io.StringIO("q1 Q0 dA 1 1 s\n")).lists["q1"].doc_ids == ["dA"]


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("q1 Q0 dA 1 1.0\n", MalformedLine, 1),
        ("q1 Q0 dA 1 1.0 sys\nq1 Q0 dB x 1.0 sys\n", MalformedLine, 2),
        ("q1 Q0 dA 1 abc sys\n", MalformedLine, 1),
        ("q1 Q1 dA 1 1.0 sys\n", MalformedLine, 1),
        ("q1 Q0 dA 1 1.0 sys\nq1 Q0 dB 2 nan sys\n", NonFiniteScore, 2),
        ("q1 Q0 dA 1 inf sys\n", NonFiniteScore, 1),
        ("q1 Q0 dA 1 1.0 sys\n\nq1 Q0 dB 2 1.0 other\n", InconsistentRunTag, 3),
    ],
)
def test_parse_run_errors(text, error, line):
    with pytest.raises(error) as info:
        parse_run(text)
    assert info.value.line_no == line


def test_parse_run_duplicate_document():
    with pytest.raises(DuplicateDocument) as info:
        parse_run("q1 Q0 dA 1 1.0 s\nq2 Q0 dA 1 1.0 s\nq1 Q0 dA 2 0.5 s\n")
    assert (info.value.query_id, info.value.doc_id) == ("q1", "dA")


def test_parse_empty_run():
    run = parse_run("\n\n")
    assert len(run) == 0


def test_parse_qrels():
    qrels = parse_qrels("q1 0 dA 2\nq1 0 dB 0")
    assert qrels.judgments == {("q1", "dA"): 2, ("q1", "dB"): 0}
    assert len(parse_qrels("")) == 0


def test_parse_qrels_negative_and_duplicates():
    qrels = parse_qrels("q1 0 dA -1\nq1 Q0 dA -1\nq2 1 dC 3\n")
    assert qrels.judgments == {("q1", "dA"): -1, ("q2", "dC"): 3}
    assert qrels.num_relevant("q1") == 0
    with pytest.raises(DuplicateJudgment):
        parse_qrels("q1 0 dA 1\nq1 0 dA 3")


@pytest.mark.parametrize("text", ["q1 0 dA\n", "q1 0 dA 1 extra\n", "q1 0 dA 1.5\n"])
def test_parse_qrels_malformed(text):
    with pytest.raises(MalformedLine):
        parse_qrels(text)


def test_write_run():
    run = Run("sys", {"q1": RankedList.from_scores("q1", [("dA", 10.5)])})
    assert write_run(run) == "q1 Q0 dA 1 10.5 sys\n"


def test_write_run_query_order():
    run = Run(
        "sys",
        {
            "q2": RankedList.from_scores("q2", [("dB", 1.0)]),
            "q1": RankedList.from_scores("q1", [("dA", 2.0), ("dC", 3.0)]),
        },
    )
    assert write_run(run).splitlines() == [
        "q1 Q0 dC 1 3.0 sys",
        "q1 Q0 dA 2 2.0 sys",
        "q2 Q0 dB 1 1.0 sys",
    ]


def test_write_run_to_stream():
    buf = io.StringIO()
    run = Run("s", {"q": RankedList.from_scores("q", [("d", 1 / 3)])})
    assert write_run(run, buf) == buf.getvalue()
    assert parse_run(buf.getvalue()) == run


def test_file_round_trip_preserves_bytes(tmp_path):
    raw = "q\xff Q0 d\x85x 1 0.1 t\xe9\n".encode("latin-1")
    path = tmp_path / "run.txt"
    path.write_bytes(raw)
    run = read_run(path)
    assert run.lists["q\xff"].doc_ids == ["d\x85x"]
    assert write_run(run).encode("latin-1") == raw


def test_ranked_list_invariants():
    with pytest.raises(DuplicateDocument):
        RankedList("q", (DocScore("a", 1, 2.0), DocScore("a", 2, 1.0)))
    with pytest.raises(FuselabError):
        RankedList("q", (DocScore("a", 1, 1.0), DocScore("b", 2, 2.0)))
    with pytest.raises(FuselabError):
        RankedList("q", (DocScore("a", 2, 1.0),))
    with pytest.raises(FuselabError):
        RankedList("q", (DocScore("a", 1, 3.0), DocScore("b", 2, 1.0)), depth=1)
    with pytest.raises(FuselabError):
        RankedList("q", (DocScore("a b", 1, 1.0),))
    with pytest.raises(FuselabError):
        RankedList("q", (DocScore("a", 1, float("nan")),))
    with pytest.raises(FuselabError):
        # equal scores must be in reverse doc id order
        RankedList("q", (DocScore("a", 1, 1.0), DocScore("b", 2, 1.0)))


def test_run_key_must_match_query_id():
    with pytest.raises(FuselabError):
        Run("t", {"q1": RankedList("q2")})


def test_qrels_lookup():
    qrels = Qrels.from_query_map({"q1": {"a": 2, "b": 0}, "q2": {"c": 1}})
    assert qrels.query_ids() == ["q1", "q2"]
    assert qrels.for_query("q1") == {"a": 2, "b": 0}
    assert qrels.for_query("nope") == {}
    assert ("q2", "c") in qrels and len(qrels) == 3


# -- properties ----------------------------------------------------------------------

token = st.text(st.characters(min_codepoint=0x21, max_codepoint=0xFF), min_size=1, max_size=6)
score = st.floats(allow_nan=False, allow_infinity=False)


@st.composite
def runs(draw):
    tag = draw(token)
    lists = {}
    # a run without entries has no lines to carry its tag
    for qid in draw(st.sets(token, min_size=1, max_size=4)):
        docs = draw(st.dictionaries(token, score, min_size=1, max_size=8))
        lists[qid] = RankedList.from_scores(qid, docs)
    return Run(tag, lists)


@settings(max_examples=300, deadline=None)
@given(runs())
def test_run_round_trip(run):
    text = write_run(run)
    parsed = parse_run(text)
    assert parsed == run
    assert write_run(parsed) == text
    for qid, ranked in parsed.lists.items():
        for a, b in zip(ranked.entries, run.lists[qid].entries):
            assert repr(a.score) == repr(b.score)  # exact, including -0.0


@settings(max_examples=200, deadline=None)
@given(runs())
def test_reparse_preserves_order(run):
    # a file already in canonical order keeps its entry order
    once = parse_run(write_run(run))
    assert [r.doc_ids for r in once.lists.values()] == [run.lists[q].doc_ids for q in once.lists]


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.tuples(token, token), st.integers(-2, 4), max_size=30))
def test_qrels_round_trip(judgments):
    qrels = Qrels(judgments)
    text = write_qrels(qrels)
    assert parse_qrels(text) == qrels
    assert write_qrels(parse_qrels(text)) == text


def test_whitespace_insensitive():
    rng = random.Random(3)
    lines = [f"q{rng.randint(1, 3)} Q0 d{i} {i} {rng.uniform(0, 9)} tag" for i in range(50)]
    canonical = parse_run("\n".join(lines))
    spaced = "\n".join(
        (" " * rng.randint(0, 2)) + line.replace(" ", " " * rng.randint(1, 3)).replace(" Q0", "\tQ0") for line in lines
    )
    assert parse_run(spaced + "\n\n\n") == canonical
