import pytest

from vpg import corpus
from vpg.edges import CALL, PLAIN, RET, Edge, connects, format_edge, format_edge_compact
from vpg.parser import ParseFailure, build_parser_pda, final_ok, p_call, p_plain, run_parser, start_state


def test_fig2_forest_before_pruning():
    g = corpus.load("fig2")
    f = run_parser(build_parser_pda(g), "a c d b".split())
    m = f.states()
    assert {e.dst for e in m[1]} == {("C", True), ("D", True)}
    assert m[2] == {Edge(PLAIN, ("D", True), "d", ("E", True))}
    assert f.kinds == [CALL, PLAIN, PLAIN, RET]
    assert final_ok(f.pda, f)


def test_derivatives_from_start():
    g = corpus.load("fig2")
    m0 = start_state(g)
    m1 = p_call(g, m0, "a")
    assert m1 == {Edge(CALL, ("L", False), "a", ("A", True))}
    assert p_plain(g, m1, "c") == {Edge(PLAIN, ("A", True), "c", ("C", True)),
                                  Edge(PLAIN, ("A", True), "c", ("D", True))}


def test_failure_position():
    g = corpus.load("fig2")
    with pytest.raises(ParseFailure) as ei:
        run_parser(build_parser_pda(g), ["a", "d"])
    assert ei.value.position == 1


def test_state_sizes_bounded_by_rules():
    for name in ("g2", "mixed", "two_calls", "appb"):
        g = corpus.load(name)
        pda = build_parser_pda(g)
        assert max(len(s) for s in pda.states) <= len(g.rules)


def test_record_trace_lengths():
    g = corpus.load("mixed")
    run = run_parser(build_parser_pda(g), "a a c b".split(), record=True)
    assert len(run.trace) == 4
    assert [len(st) for _, st in run.trace] == [1, 2, 2, 1]


def test_edge_rendering_and_connection():
    ec = Edge(CALL, ("L", False), "a", ("A", True))
    er = Edge(RET, (("L", False), ("A", True)), "b", ("L", False))
    assert format_edge_compact(ec) == "(Lᶠ,⟨a,Aᵗ)"
    assert format_edge_compact(er) == "((Lᶠ,Aᵗ),b⟩,Lᶠ)"
    assert "--b⟩-->" in format_edge(er)
    assert connects((ec,), (er,))
