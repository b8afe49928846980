import pytest

from vpg import corpus
from vpg.oracle import (BoundExceeded, DerivationQuery, bigstep_enumerate, cfg_derive_enumerate,
                        cfg_tree_conforms, check_parse_invariants, smallstep_trees)
from vpg.parser import build_parser_pda, run_parser
from vpg.syntax import parse_tagged_cfg
from vpg.actions import Node, Token


def test_bigstep_fig2():
    g = corpus.load("fig2")
    trees = bigstep_enumerate(g, ("L", False), "a c d b".split())
    assert len(trees) == 1


def test_bigstep_equals_smallstep():
    g = corpus.load("mixed")
    for w in ("a b", "a a b", "c a c b b", "b a"):
        w = w.split()
        assert bigstep_enumerate(g, ("L", False), w) == smallstep_trees(g, w)


def test_cfg_membership():
    g = corpus.load("json")
    assert cfg_derive_enumerate(g, "[ STRING , { STRING : null } ]".split())
    assert not cfg_derive_enumerate(g, "[ STRING , ]".split())
    with pytest.raises(BoundExceeded):
        cfg_derive_enumerate(g, ["null"] * 5, bound=4)


def test_query_bound():
    with pytest.raises(ValueError):
        DerivationQuery(("L", False), ("a", "b"), 1)


def test_invariants_hold_and_catch_a_broken_trace():
    g = corpus.load("fig2")
    pda = build_parser_pda(g)
    w = "a c d b".split()
    run = run_parser(pda, w, record=True)
    trace = [(pda.states[s], tuple(pda.states[x] for x in st)) for s, st in run.trace]
    assert check_parse_invariants(g, w, trace)
    broken = list(trace)
    broken[1] = (frozenset(list(trace[1][0])[:1]), trace[1][1])
    res = check_parse_invariants(g, w, broken)
    assert not res and res.clause in (1, 3)


def test_cfg_tree_conformance():
    g = parse_tagged_cfg("s = 'a' t* 'b' ; t = 'c' e ; e = ;")
    c = Token("c")
    good = Node("s", (Token("a"), Node("t", (c,)), Node("t", (c, Node("e"))), Token("b")))
    assert cfg_tree_conforms(g, good) is None
    bad = Node("s", (Token("a"), Node("t", ()), Token("b")))
    assert cfg_tree_conforms(g, bad) is not None
    assert cfg_tree_conforms(g, Node("t", (c,))) == "root is not the start symbol"
