import pytest

from vpg import corpus
from vpg.grammar import Mode, Vpg
from vpg.recognizer import (Reject, build_recognizer_pda, format_stack, format_state, recognize,
                            run_recognizer)
from vpg.syntax import parse_vpg


@pytest.mark.parametrize("w, ok", [
    ("a c d b", True),
    ("a c c b", True),
    ("a c d b a c c b", True),
    ("", True),
    ("a c b", False),
    ("a c d", False),
    ("c d", False),
    ("b", False),
])
def test_fig2(w, ok):
    assert recognize(corpus.load("fig2"), w.split()) is ok


@pytest.mark.parametrize("w, ok", [
    ("a b a a a b b", True),
    ("a b", True),
    ("a b a a b", True),
    ("a b a", False),
    ("a", False),
    ("a b b", False),
])
def test_general_grammar(w, ok):
    assert recognize(corpus.load("appb"), w.split()) is ok


def test_pending_returns():
    g = corpus.load("pending_return")
    assert recognize(g, ["b", "b"])


def test_reject_reasons():
    g = corpus.load("fig2")
    pda = build_recognizer_pda(g)
    r = run_recognizer(pda, g, ["b"])
    assert not r.accepted and r.reject.reason == "EmptyStackOnReturn"
    r = run_recognizer(pda, g, ["a", "c"])
    assert r.reject.reason == "NotAcceptingAtEof"
    r = run_recognizer(pda, g, ["c"])
    assert r.reject.reason == "NoTransition" and r.reject.position == 0
    with pytest.raises(Reject):
        run_recognizer(pda, g, ["zz"], raise_on_reject=True)


def test_final_stack_for_pending_call():
    g = corpus.load("pending_call")
    pda = build_recognizer_pda(g)
    r = run_recognizer(pda, g, ["a"])
    assert r.accepted
    assert format_stack(r.stack) == "[{(L,L)},⟨a]·⊥"
    assert format_state(r.state) == "{(L,L)}"


def test_tables_are_functions():
    for name in ("fig2", "appb", "mixed"):
        pda = build_recognizer_pda(corpus.load(name))
        keys = [(s, sym, top) for s, sym, top, _, _ in pda.transitions()]
        assert len(keys) == len(set(keys))


def test_wm_mode_accepts_only_empty_stack():
    g = parse_vpg("`L` = <'a' `L` 'b'> `L` | ε ;")
    assert g.mode is Mode.WELL_MATCHED
    assert not recognize(g, ["a"])
    assert recognize(g, ["a", "b"])
