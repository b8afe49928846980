"""Grammar objects: terminals, VPG rules, tagged CFGs and semantic action expressions.

A visibly pushdown grammar partitions its terminals into plain, call and
return symbols.  Nonterminals are plain strings; terminals carry their kind.
Every grammar object is immutable once built.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


class GrammarError(Exception):
    """Base class for grammar construction and validation failures."""


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DuplicateRule(GrammarError):
    pass


class UndeclaredSymbol(GrammarError):
    pass


class KindConflict(GrammarError):
    pass


class IllFormedRule(GrammarError):
    def __init__(self, rule, clause: str):
        super().__init__(f"{rule}: {clause}")
        self.rule = rule
        self.clause = clause


class Kind(enum.Enum):
    PLAIN = "plain"
    CALL = "call"
    RETURN = "return"


class Mode(enum.Enum):
    WELL_MATCHED = "wm"
    GENERAL = "general"


@dataclass(frozen=True, order=True)
class Terminal:
    name: str
    kind: Kind = field(default=Kind.PLAIN, compare=False)

    @property
    def display(self) -> str:
        if self.kind is Kind.CALL:
            return "⟨" + self.name
        if self.kind is Kind.RETURN:
            return self.name + "⟩"
        return self.name

    def __str__(self):
        return self.display


def plain(name: str) -> Terminal:
    return Terminal(name, Kind.PLAIN)


def call(name: str) -> Terminal:
    return Terminal(name, Kind.CALL)


def ret(name: str) -> Terminal:
    return Terminal(name, Kind.RETURN)


# ---------------------------------------------------------------------------
# VPG rules


@dataclass(frozen=True, order=True)
class Empty:
    head: str

    def __str__(self):
        return f"{self.head} -> ε"


@dataclass(frozen=True, order=True)
class Linear:
    head: str
    term: Terminal
    target: str

    @property
    def pending(self) -> bool:
        return self.term.kind is not Kind.PLAIN

    def __str__(self):
        return f"{self.head} -> {self.term} {self.target}"


@dataclass(frozen=True, order=True)
class Matching:
    head: str
    call: Terminal
    inner: str
    ret: Terminal
    after: str

    def __str__(self):
        return f"{self.head} -> {self.call} {self.inner} {self.ret} {self.after}"


VpgRule = Union[Empty, Linear, Matching]


def rule_symbols(rule: VpgRule) -> tuple:
    if isinstance(rule, Linear):
        return (rule.head, rule.target)
    if isinstance(rule, Matching):
        return (rule.head, rule.inner, rule.after)
    return (rule.head,)


def rule_terminals(rule: VpgRule) -> tuple:
    if isinstance(rule, Linear):
        return (rule.term,)
    if isinstance(rule, Matching):
        return (rule.call, rule.ret)
    return ()


class Vpg:
    """A (well-matched or general) visibly pushdown grammar.

    ``v0`` may be given explicitly; otherwise it is inferred as the largest set
    of nonterminals from which no pending rule is reachable (the inner
    nonterminal of a matching rule does not count as reachable, since it opens
    a new nesting level).  ``mode`` defaults to well-matched when the grammar
    has no pending rules.
    """

    def __init__(self, rules: Iterable[VpgRule], start: str, *,
                 mode: Optional[Mode] = None, v0: Optional[Iterable[str]] = None,
                 terminals: Iterable[Terminal] = (), nonterminals: Iterable[str] = ()):
        rules = tuple(dict.fromkeys(rules))
        self.rules = rules
        self.start = start

        terms: dict[str, Terminal] = {}
        for t in list(terminals) + [t for r in rules for t in rule_terminals(r)]:
            old = terms.setdefault(t.name, t)
            if old.kind is not t.kind:
                raise KindConflict(f"terminal {t.name!r} used as both {old.kind.value} and {t.kind.value}")
        self.terminals = terms

        nts = set(nonterminals)
        nts.add(start)
        for r in rules:
            nts.update(rule_symbols(r))
        self.nonterminals = frozenset(nts)

        has_pending = any(isinstance(r, Linear) and r.pending for r in rules)
        if mode is None:
            mode = Mode.GENERAL if has_pending else Mode.WELL_MATCHED
        self.mode = mode

        self._index()
        self.v0 = frozenset(v0) if v0 is not None else self._infer_v0()
        self.v1 = self.nonterminals - self.v0

    def _index(self):
        self.eps: set[str] = set()
        self.plain_next = defaultdict(list)     # (L, c) -> [L1]
        self.pending_call = defaultdict(list)   # (L, a) -> [L1]
        self.pending_ret = defaultdict(list)    # (L, b) -> [L1]
        self.matching = defaultdict(list)       # (L, a) -> [(L1, b, L2)]
        self.match_after = defaultdict(list)    # (L, a, L1, b) -> [L2]
        self.rules_of = defaultdict(list)
        for r in self.rules:
            self.rules_of[r.head].append(r)
            if isinstance(r, Empty):
                self.eps.add(r.head)
            elif isinstance(r, Linear):
                k = r.term.kind
                table = {Kind.PLAIN: self.plain_next, Kind.CALL: self.pending_call,
                         Kind.RETURN: self.pending_ret}[k]
                table[(r.head, r.term.name)].append(r.target)
            else:
                self.matching[(r.head, r.call.name)].append((r.inner, r.ret.name, r.after))
                self.match_after[(r.head, r.call.name, r.inner, r.ret.name)].append(r.after)
        self.eps = frozenset(self.eps)

    def _infer_v0(self) -> frozenset:
        # L is in V1 iff it can reach a pending rule through linear targets or
        # matching continuations.
        succ = defaultdict(set)
        bad = set()
        for r in self.rules:
            if isinstance(r, Linear):
                if r.pending:
                    bad.add(r.head)
                succ[r.target].add(r.head)
            elif isinstance(r, Matching):
                succ[r.after].add(r.head)
        work = list(bad)
        while work:
            n = work.pop()
            for p in succ[n]:
                if p not in bad:
                    bad.add(p)
                    work.append(p)
        return frozenset(self.nonterminals - bad)

    def terminal(self, name: str) -> Terminal:
        return self.terminals[name]

    def kind_of(self, name: str) -> Kind:
        return self.terminals[name].kind

    @property
    def plains(self) -> list:
        return sorted(n for n, t in self.terminals.items() if t.kind is Kind.PLAIN)

    @property
    def calls(self) -> list:
        return sorted(n for n, t in self.terminals.items() if t.kind is Kind.CALL)

    @property
    def returns(self) -> list:
        return sorted(n for n, t in self.terminals.items() if t.kind is Kind.RETURN)

    def __repr__(self):
        return f"Vpg(start={self.start!r}, rules={len(self.rules)}, mode={self.mode.value})"

    def __str__(self):
        from .syntax import format_vpg
        return format_vpg(self)


def check_vpg_wellformed(g: Vpg) -> None:
    """Raise IllFormedRule unless every rule fits the shapes allowed for ``g.mode``."""
    for r in g.rules:
        if r.head not in g.nonterminals:
            raise IllFormedRule(r, "undeclared head")
        if isinstance(r, Linear):
            if g.mode is Mode.WELL_MATCHED and r.pending:
                raise IllFormedRule(r, "well-matched grammars allow only plain symbols in linear rules")
            if r.head in g.v0:
                if r.pending:
                    raise IllFormedRule(r, "V0 nonterminal with a pending rule")
                if r.target not in g.v0:
                    raise IllFormedRule(r, "V0 nonterminal continues into V1")
        elif isinstance(r, Matching):
            if r.call.kind is not Kind.CALL or r.ret.kind is not Kind.RETURN:
                raise IllFormedRule(r, "matching rule needs a call and a return symbol")
            if r.inner not in g.v0:
                raise IllFormedRule(r, "nested nonterminal must be well-matched (V0)")
            if r.head in g.v0 and r.after not in g.v0:
                raise IllFormedRule(r, "V0 nonterminal continues into V1")
    if g.start not in g.nonterminals:
        raise IllFormedRule(g.start, "start symbol undeclared")


# ---------------------------------------------------------------------------
# Semantic action expressions


def superscript(n: int) -> str:
    return str(n).translate(str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹"))


@dataclass(frozen=True)
class Default:
    """Build a tree node labelled ``head`` from ``arity`` values."""
    head: str
    arity: int

    def __str__(self):
        return f"{self.head}{superscript(self.arity)}"


@dataclass(frozen=True)
class UserCode:
    text: str
    arity: int

    def __str__(self):
        return "@{" + self.text + "}"


@dataclass(frozen=True)
class Collect:
    """Group value for a desugared regular operator.

    Pops ``arity`` values (plus the running group when ``extend``) and pushes a
    single group node whose children are the popped values in source order.
    """
    label: str
    arity: int
    extend: bool = False

    def __str__(self):
        return f"[{self.label}]{superscript(self.arity)}{'+' if self.extend else ''}"


@dataclass(frozen=True)
class Compose:
    """``outer ∘ inner``: run ``inner`` on the leading values, then ``outer``."""
    outer: "ActionExpr"
    inner: "ActionExpr"

    def __str__(self):
        return f"{self.outer}∘{self.inner}"


ActionExpr = Union[Default, UserCode, Collect, Compose]


def compose(outer: Optional[ActionExpr], inner: Optional[ActionExpr]) -> Optional[ActionExpr]:
    if outer is None:
        return inner
    if inner is None:
        return outer
    return Compose(outer, inner)


def action_arity(a: ActionExpr) -> int:
    """Number of stack values consumed when the action runs."""
    if isinstance(a, Compose):
        # inner consumes its arity and pushes one result the outer then sees
        return action_arity(a.inner) + action_arity(a.outer) - 1
    if isinstance(a, Collect):
        return a.arity + (1 if a.extend else 0)
    return a.arity


def action_to_json(a: Optional[ActionExpr]):
    if a is None:
        return None
    if isinstance(a, Default):
        return ["default", a.head, a.arity]
    if isinstance(a, UserCode):
        return ["user", a.text, a.arity]
    if isinstance(a, Collect):
        return ["collect", a.label, a.arity, a.extend]
    return ["compose", action_to_json(a.outer), action_to_json(a.inner)]


def action_from_json(d) -> Optional[ActionExpr]:
    if d is None:
        return None
    tag = d[0]
    if tag == "default":
        return Default(d[1], d[2])
    if tag == "user":
        return UserCode(d[1], d[2])
    if tag == "collect":
        return Collect(d[1], d[2], d[3])
    if tag == "compose":
        return Compose(action_from_json(d[1]), action_from_json(d[2]))
    raise ValueError(f"unknown action tag {tag!r}")


# ---------------------------------------------------------------------------
# Tagged CFGs


@dataclass(frozen=True)
class Group:
    """Parenthesised alternatives with an optional regular operator (?, *, +)."""
    alternatives: tuple
    op: Optional[str] = None

    def __str__(self):
        inner = " | ".join(" ".join(item_str(i) for i in alt) for alt in self.alternatives)
        return f"({inner}){self.op or ''}"


def item_str(item) -> str:
    if isinstance(item, Terminal):
        return item.display
    return str(item)


@dataclass(frozen=True)
class CfgRule:
    head: str
    rhs: tuple
    action: Optional[ActionExpr] = None
    line: int = field(default=0, compare=False)

    def effective_action(self) -> ActionExpr:
        return self.action if self.action is not None else Default(self.head, len(self.rhs))

    def __str__(self):
        body = " ".join(item_str(i) for i in self.rhs) or "ε"
        return f"{self.head} -> {body}"


def iter_terminals(items) -> Iterable[Terminal]:
    for it in items:
        if isinstance(it, Terminal):
            yield it
        elif isinstance(it, Group):
            for alt in it.alternatives:
                yield from iter_terminals(alt)


def iter_nonterminals(items) -> Iterable[str]:
    for it in items:
        if isinstance(it, str):
            yield it
        elif isinstance(it, Group):
            for alt in it.alternatives:
                yield from iter_nonterminals(alt)


class TaggedCfg:
    """A CFG whose terminals are tagged plain, call or return."""

    def __init__(self, rules: Iterable[CfgRule], start: str):
        self.rules = tuple(rules)
        self.start = start
        terms: dict[str, Terminal] = {}
        for r in self.rules:
            for t in iter_terminals(r.rhs):
                old = terms.setdefault(t.name, t)
                if old.kind is not t.kind:
                    raise KindConflict(f"terminal {t.name!r} used as both {old.kind.value} and {t.kind.value}")
        self.terminals = terms
        self.nonterminals = frozenset([start] + [r.head for r in self.rules])
        for r in self.rules:
            for n in iter_nonterminals(r.rhs):
                if n not in self.nonterminals:
                    raise UndeclaredSymbol(f"nonterminal {n!r} used in rule for {r.head!r} but never defined")
        self.rules_of = defaultdict(list)
        for r in self.rules:
            self.rules_of[r.head].append(r)

    def __repr__(self):
        return f"TaggedCfg(start={self.start!r}, rules={len(self.rules)})"


def nullable_nonterminals(g) -> frozenset:
    """Nonterminals deriving the empty string.

    For a Vpg this is exactly the heads of ε-rules, because every other rule
    shape emits a terminal.
    """
    if isinstance(g, Vpg):
        return g.eps
    nullable: set = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.head not in nullable and items_nullable(r.rhs, nullable):
                nullable.add(r.head)
                changed = True
    return frozenset(nullable)


def items_nullable(items, nullable) -> bool:
    return all(item_nullable(i, nullable) for i in items)


def item_nullable(item, nullable) -> bool:
    if isinstance(item, Terminal):
        return False
    if isinstance(item, str):
        return item in nullable
    if isinstance(item, Group):
        if item.op in ("?", "*"):
            return True
        return any(items_nullable(alt, nullable) for alt in item.alternatives)
    # matched tokens and anything else consume input
    return False
