import pytest

from vpg import corpus
from vpg.grammar import Default, check_vpg_wellformed
from vpg.recognizer import recognize
from vpg.syntax import parse_tagged_cfg
from vpg.translate import (Fresh, IterationCapExceeded, LeftRecursionLike, MatchedToken, NonTailCycle,
                           desugar_regex_ops, is_linear, to_linear_form, to_simple_form, translate,
                           validate)
from vpg.verify import roundtrip


def simple(text):
    g = parse_tagged_cfg(text)
    fresh = Fresh(g.nonterminals)
    return to_simple_form(desugar_regex_ops(g, fresh), fresh), fresh


@pytest.mark.parametrize("text", [
    "L = 'c' L | ;",
    "L = <'a' L 'b'> L | ;",
    "L = A L | ; A = 'x' ;",
    "s = <'(' s ')'> s | 'k' ;",
])
def test_validator_accepts(text):
    rules, _ = simple(text)
    validate(rules)


@pytest.mark.parametrize("text, exc", [
    ("L = L 'c' | ;", LeftRecursionLike),
    ("L = A 'c' | ; A = L 'd' | ;", LeftRecursionLike),
    ("L = 'c' L 'd' | ;", NonTailCycle),
    ("L = N L | 'x' ; N = ;", LeftRecursionLike),
])
def test_validator_rejects(text, exc):
    rules, _ = simple(text)
    with pytest.raises(exc) as ei:
        validate(rules)
    assert ei.value.cycle[0] == ei.value.cycle[-1]


def test_identical_bracket_bodies_share_a_name():
    rules, _ = simple("s = <'a' x 'b'> <'a' x 'b'> ; x = 'c' ;")
    inners = {i.inner for r in rules for i in r.rhs if isinstance(i, MatchedToken)}
    assert len(inners) == 1


def test_suffix_reused_once():
    rules, fresh = simple("s = a t u | b t u ; a = 'x' ; b = 'y' ; t = 'z' ; u = 'w' ;")
    validate(rules)
    lin, T = to_linear_form(rules, fresh)
    assert all(is_linear(r.rhs) for r in lin)
    assert len(T) == 1


def test_iteration_cap(monkeypatch):
    rules, fresh = simple("s = a b c ; a = 'x' ; b = 'y' ; c = 'z' ;")
    with pytest.raises(IterationCapExceeded):
        to_linear_form(list(rules), fresh, cap=1)
    monkeypatch.setenv("VPG_ITER_CAP", "1")
    rules, fresh = simple("s = a b c ; a = 'x' ; b = 'y' ; c = 'z' ;")
    with pytest.raises(IterationCapExceeded):
        to_linear_form(list(rules), fresh)


def test_chain_of_plain_symbols():
    tr = translate(parse_tagged_cfg("L = 'c' 'd' ;"))
    lines = tr.stage_lines("vpg")
    assert len(lines) == 3 and lines[0].startswith("L -> c _g")
    assert recognize(tr.vpg, ["c", "d"]) and not recognize(tr.vpg, ["c"])


def test_action_of_expanded_rule():
    tr = translate(corpus.load("appf"))
    assert "L -> c ⟨a _g1 b⟩ E  @L⁶∘A¹" in tr.stage_lines("linear")
    assert tr.actions[[r for r in tr.vpg.rules if r.head == "A"][0]] == Default("A", 2)


@pytest.mark.parametrize("name", ["json", "xml", "html"])
def test_corpus_grammars_translate(name):
    tr = translate(corpus.load(name))
    check_vpg_wellformed(tr.vpg)
    assert tr.vpg.start == tr.source.start


def test_actions_clash_goes_through_alias():
    # both alternatives chain to the same VPG rule but build different values
    tr = translate(parse_tagged_cfg("s = a | b ; a = 'x' ; b = 'x' ;"))
    assert recognize(tr.vpg, ["x"])
    rep = roundtrip(tr, 2, "clash")
    assert rep.ok and rep.trees == 2


@pytest.mark.parametrize("name, n, alphabet", [
    ("appf", 6, None),
    ("json", 4, None),
    ("xml", 4, ["OpenTag", "CloseTag", "TEXT", "SingleTag", "XMLDeclOpen", "SPECIAL_CLOSE"]),
])
def test_round_trip(name, n, alphabet):
    rep = roundtrip(translate(corpus.load(name)), n, name, alphabet)
    assert rep.ok, rep.examples[:3]
    assert rep.accepted > 0


def test_round_trip_user_grammar():
    g = parse_tagged_cfg("""
        doc  = item* ;
        item = <'(' doc ')'> | 'x' ('y')? ;
    """)
    rep = roundtrip(translate(g), 6, "doc")
    assert rep.ok, rep.examples[:3]
    assert rep.accepted > 20
