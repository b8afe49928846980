import pytest

from vpg import corpus
from vpg.extract import (complete_trees, count_trees, extract, first_tree, format_tree_trace,
                         iter_trees, tree_sexpr)
from vpg.oracle import BigStep
from vpg.parser import build_parser_pda, run_parser
from vpg.pruner import EmptyAfterPrune, build_pruner_pda, prune_verbatim, run_pruner


def pruned(name, w):
    g = corpus.load(name)
    pda = build_pruner_pda(build_parser_pda(g))
    return g, run_pruner(pda, run_parser(pda.parser, w.split()))


def test_fig2_single_tree():
    g, pr = pruned("fig2", "a c d b")
    assert [len(m) for m in pr.states] == [1, 1, 1, 1]
    v = first_tree(g, pr.states, pr.kinds)
    assert format_tree_trace(v) == "[(Lᶠ,⟨a,Aᵗ), (Aᵗ,c,Dᵗ), (Dᵗ,d,Eᵗ), ((Lᶠ,Aᵗ),b⟩,Lᶠ)]"
    assert tree_sexpr(v) == "(L ⟨a (A c (D d (E))) b⟩ (L))"


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_g2_counts(n):
    g, pr = pruned("g2", " ".join(["c d"] * n))
    assert count_trees(g, pr.states, pr.kinds) == 2 ** n
    assert len(set(iter_trees(g, pr.states, pr.kinds, None))) == 2 ** n


def test_iter_limit_and_order():
    g, pr = pruned("g2", "c d c d c d")
    two = list(iter_trees(g, pr.states, pr.kinds, 2))
    assert len(two) == 2 and two[0] != two[1]
    assert two[0] == first_tree(g, pr.states, pr.kinds)


def test_fold_matches_counting_extractor():
    g, pr = pruned("mixed", "a c a b c b")
    folded = complete_trees(g, extract(g, pr.states, pr.kinds))
    assert folded == set(iter_trees(g, pr.states, pr.kinds, None))
    assert folded == BigStep(g).trees("L", False, "a c a b c b".split())


def test_empty_after_prune():
    g = corpus.load("fig2")
    pda = build_pruner_pda(build_parser_pda(g))
    forest = run_parser(pda.parser, ["a", "c"])
    with pytest.raises(EmptyAfterPrune):
        run_pruner(pda, forest)


def test_local_clauses_leave_dead_edges_that_refinement_removes():
    # one matching rule keeps an inner edge alive that no tree uses
    g = corpus.load("example_a")
    pda = build_pruner_pda(build_parser_pda(g))
    w = "a c b a d b".split()
    forest = run_parser(pda.parser, w)
    local = prune_verbatim(g, forest.states(), forest.kinds)
    refined = run_pruner(pda, forest).states
    used = [set() for _ in w]
    for v in BigStep(g).trees("L", False, w):
        for i, e in enumerate(v):
            used[i].add(e)
    assert [set(m) for m in refined] == used
    assert all(set(a) >= set(b) for a, b in zip(local, refined))


def test_table_and_direct_pruning_agree():
    g = corpus.load("mixed")
    pda = build_pruner_pda(build_parser_pda(g))
    forest = run_parser(pda.parser, "a a c b c".split())
    a = run_pruner(pda, forest, refine=False).states
    b = run_pruner(pda, forest, direct=True, refine=False).states
    assert a == b


def test_empty_input():
    g = corpus.load("fig2")
    assert list(iter_trees(g, [], [], None)) == [()]
    assert count_trees(g, [], []) == 1
