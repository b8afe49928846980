import pytest

from vpg import corpus
from vpg.actions import (Apply, MissingAction, MultipleResults, Node, Push, StackUnderflow, Token,
                         UnsupportedAction, cfg_tree_frontier, cfg_tree_sexpr, default_actions,
                         eval_stack_machine, format_cfg_tree, format_program, tree_to_stack_machine,
                         vpg_tree_to_cfg_tree)
from vpg.extract import iter_trees
from vpg.grammar import Default, UserCode
from vpg.parser import build_parser_pda, run_parser
from vpg.pruner import build_pruner_pda, run_pruner
from vpg.translate import translate


def trees(g, w, limit=None):
    pda = build_pruner_pda(build_parser_pda(g))
    pr = run_pruner(pda, run_parser(pda.parser, w))
    return list(iter_trees(g, pr.states, pr.kinds, limit))


def test_appf_program_and_value():
    tr = translate(corpus.load("appf"))
    (v,) = trees(tr.vpg, ["c", "a", "c", "b"])
    p = tree_to_stack_machine(v, tr.vpg, tr.actions)
    assert format_program(p) == "[L⁶∘A¹,c,⟨a,A¹,c,E⁰,b⟩,E⁰]"
    t = eval_stack_machine(p)
    assert format_cfg_tree(t) == "(L,[(A,[c]),⟨a,(A,[c]),E⁰,b⟩,E⁰])"
    assert cfg_tree_sexpr(t) == "(L (A c) ⟨a (A c) (E) b⟩ (E))"


def test_empty_tree_program():
    g = corpus.load("fig2")
    p = tree_to_stack_machine((), g, default_actions(g))
    assert format_program(p) == "[L⁰]"


def test_single_push_apply():
    assert format_cfg_tree(eval_stack_machine([Apply(Default("L", 1)), Push(Token("c"))])) == "(L,[c])"


def test_fig2_default_actions():
    g = corpus.load("fig2")
    (v,) = trees(g, "a c d b".split())
    t = vpg_tree_to_cfg_tree(v, g, default_actions(g))
    assert cfg_tree_sexpr(t) == "(L ⟨a (A c (D d (E))) b⟩ (L))"


def test_g2_trees_differ_at_a_or_b():
    g = corpus.load("g2")
    a, b = (cfg_tree_sexpr(vpg_tree_to_cfg_tree(v, g, default_actions(g))) for v in trees(g, "c d c d".split(), 2))
    assert a != b
    assert {"(A", "(B"} & set(a.split()) and {"(A", "(B"} & set(b.split())


def test_lexemes_become_leaves():
    tr = translate(corpus.load("json"))
    w = ["[", "NUMBER", "]"]
    (v,) = trees(tr.vpg, w)
    t = vpg_tree_to_cfg_tree(v, tr.vpg, tr.actions, [None, "42", None])
    assert [x.display for x in cfg_tree_frontier(t)] == ["⟨[", "42", "]⟩"]


def test_errors():
    g = corpus.load("fig2")
    (v,) = trees(g, "a c d b".split())
    with pytest.raises(MissingAction):
        tree_to_stack_machine(v, g, {})
    with pytest.raises(StackUnderflow):
        eval_stack_machine([Apply(Default("L", 2)), Push(Token("c"))])
    with pytest.raises(MultipleResults):
        eval_stack_machine([Push(Token("c")), Push(Token("d"))])
    with pytest.raises(UnsupportedAction):
        eval_stack_machine([Apply(UserCode("f()", 0))])


def test_deep_tree_renders_iteratively():
    t = Token("x")
    for _ in range(5000):
        t = Node("n", (t,))
    assert cfg_tree_sexpr(t).count("(n") == 5000
