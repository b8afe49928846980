import pytest

from vpg import corpus
from vpg.grammar import (Collect, Compose, Default, DuplicateRule, Empty, GrammarSyntaxError,
                         IllFormedRule, Kind, KindConflict, Linear, Matching, Mode, UndeclaredSymbol,
                         UserCode, Vpg, action_arity, action_from_json, action_to_json, call,
                         check_vpg_wellformed, compose, nullable_nonterminals, plain, ret)
from vpg.syntax import format_tagged_cfg, format_vpg, parse_grammar_file, parse_tagged_cfg, parse_vpg


def test_parse_fig2_rules():
    g = corpus.load("fig2")
    assert g.start == "L"
    assert Matching("L", call("a"), "A", ret("b"), "L") in g.rules
    assert Linear("A", plain("c"), "C") in g.rules
    assert g.eps == {"L", "E"}
    assert g.mode is Mode.WELL_MATCHED


def test_pending_rules_make_general_mode():
    g = corpus.load("appb")
    assert g.mode is Mode.GENERAL
    assert "L3" in g.v1 and "L2" in g.v0


def test_format_vpg_round_trips():
    for name in ("fig2", "g2", "appb", "mixed", "two_calls"):
        g = corpus.load(name)
        again = parse_vpg(format_vpg(g))
        assert set(again.rules) == set(g.rules)
        assert again.start == g.start


def test_tagged_cfg_groups_and_actions():
    g = parse_tagged_cfg("s = <'(' x* ')'> @{ mk($2) } | 'k' ; x = 'y' ('z' | 'w')? ;")
    r0, r1, r2 = g.rules
    assert isinstance(r0.action, UserCode) and r0.action.arity == 3
    assert r1.action is None and r1.effective_action() == Default("s", 1)
    assert g.terminals["("].kind is Kind.CALL
    assert format_tagged_cfg(g).count("=") == 2


def test_capitalised_heads_are_nonterminals():
    g = parse_tagged_cfg("L = L 'c' | ;")
    assert g.rules[0].rhs == ("L", plain("c"))


def test_reserved_names():
    with pytest.raises(GrammarSyntaxError):
        parse_tagged_cfg("_x = 'a' ;")
    assert parse_tagged_cfg("_x = 'a' ;", allow_reserved=True).start == "_x"


@pytest.mark.parametrize("text, exc", [
    ("", GrammarSyntaxError),
    ("s = 'a' ; s = 'b' ;", DuplicateRule),
    ("s = t ;", UndeclaredSymbol),
    ("s = <'a' 'a'> ;", KindConflict),
    ("s = <'a' ;", GrammarSyntaxError),
    ("s = 'a'> ;", GrammarSyntaxError),
    ("s = 'a' @{x} 'b' ;", GrammarSyntaxError),
    ("s = 'a", GrammarSyntaxError),
])
def test_syntax_errors(text, exc):
    with pytest.raises(exc):
        parse_tagged_cfg(text)


def test_auto_detection():
    assert isinstance(parse_grammar_file("s = 'a' s | ;"), Vpg)
    assert not isinstance(parse_grammar_file("s = 'a' 'b' ;"), Vpg)


def test_wellformedness_rejects_pending_in_v0():
    g = Vpg([Linear("L", call("a"), "L"), Empty("L")], "L", mode=Mode.GENERAL, v0=["L"])
    with pytest.raises(IllFormedRule):
        check_vpg_wellformed(g)


def test_wellformedness_rejects_pending_in_wm_mode():
    g = Vpg([Linear("L", call("a"), "L"), Empty("L")], "L", mode=Mode.WELL_MATCHED)
    with pytest.raises(IllFormedRule):
        check_vpg_wellformed(g)


def test_inner_must_be_well_matched():
    g = Vpg([Matching("L", call("a"), "M", ret("b"), "L"), Linear("M", call("a"), "M"), Empty("M"),
             Empty("L")], "L")
    with pytest.raises(IllFormedRule):
        check_vpg_wellformed(g)


def test_action_algebra():
    a = compose(Default("L", 6), Default("A", 1))
    assert str(a) == "L⁶∘A¹"
    assert action_arity(a) == 6
    assert compose(None, Default("E", 0)) == Default("E", 0)
    assert action_arity(Collect("g", 2, True)) == 3
    for x in (a, Collect("g", 2, True), UserCode("f($1)", 1), None):
        assert action_from_json(action_to_json(x)) == x
    assert isinstance(a, Compose)


def test_nullable():
    g = parse_tagged_cfg("s = a b ; a = 'x' | ; b = ('y')* ;")
    assert nullable_nonterminals(g) == {"s", "a", "b"}
    assert nullable_nonterminals(corpus.load("fig2")) == {"L", "E"}
