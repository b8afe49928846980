"""Tagged CFG to VPG translation.

Stages: regular operators are desugared, every bracketed ``⟨a s b⟩`` becomes
a matched token over a fresh nonterminal (simple form), the dependency
graph is validated, rules are rewritten until every body is a run of plain
terminals and matched tokens with an optional trailing nonterminal (linear
form), and finally each linear rule is chained into VPG rules.

Actions travel with the rules.  Every original rule starts with its default
action; expanding a leading nonterminal composes the two actions; generated
nonterminals carry no action, so their values stay on the stack for the
rule that uses them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .grammar import (ActionExpr, CfgRule, Collect, Default, Empty, GrammarError, Group, Kind,
                      Linear, Matching, TaggedCfg, Terminal, Vpg, check_vpg_wellformed, compose)
from .syntax import fmt_nt, fmt_term, format_cfg_rules, format_vpg

DEFAULT_ITER_CAP = 10_000


class TranslationError(GrammarError):
    pass


class UnbalancedBrackets(TranslationError):
    pass


class ValidationError(TranslationError):
    def __init__(self, message: str, cycle: list):
        super().__init__(message + ": " + " -> ".join(cycle))
        self.cycle = cycle


class LeftRecursionLike(ValidationError):
    pass


class NonTailCycle(ValidationError):
    pass


class IterationCapExceeded(TranslationError):
    pass


class InternalNonSink(TranslationError):
    pass


@dataclass(frozen=True)
class MatchedToken:
    call: Terminal
    inner: str
    ret: Terminal

    def format(self) -> str:
        return f"{fmt_term(self.call)} {fmt_nt(self.inner)} {fmt_term(self.ret)}"

    def __str__(self):
        return f"{self.call.display} {self.inner} {self.ret.display}"


@dataclass(frozen=True)
class TRule:
    """A rule during translation; ``action`` None means the rule builds no value."""
    head: str
    rhs: tuple
    action: Optional[ActionExpr] = None


class Fresh:
    """``_g<N>`` names with a note on what each one stands for."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.n = 0
        self.notes: dict = {}

    def __call__(self, note: str = "") -> str:
        while True:
            self.n += 1
            name = f"_g{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                self.notes[name] = note
                return name


def _body_str(items) -> str:
    return " ".join(str(i) for i in items) or "ε"


# -- desugaring ----------------------------------------------------------------

def desugar_regex_ops(g: TaggedCfg, fresh: Optional[Fresh] = None) -> TaggedCfg:
    """Replace every group by a fresh nonterminal whose value is one group node.

    ``(s)*`` becomes ``N -> ε | s N``, ``(s)?`` becomes ``N -> ε | s`` and
    ``(s)+`` becomes ``N -> s N | s``; a bare ``(s)`` becomes ``N -> s``.
    Inner groups are replaced before outer ones.  Rules keep their original
    action (explicit default when none was written).
    """
    fresh = fresh or Fresh(g.nonterminals)
    out: list = []

    def seq(items) -> tuple:
        res = []
        for it in items:
            if isinstance(it, Group):
                alts = [seq(a) for a in it.alternatives]
                n = fresh(f"group {it}")
                for a in alts:
                    if it.op in ("*", "+"):
                        out.append(CfgRule(n, a + (n,), Collect(n, len(a), True)))
                    if it.op != "*":
                        out.append(CfgRule(n, a, Collect(n, len(a))))
                if it.op in ("*", "?"):
                    out.append(CfgRule(n, (), Collect(n, 0)))
                res.append(n)
            else:
                res.append(it)
        return tuple(res)

    main = []
    for r in g.rules:
        main.append(CfgRule(r.head, seq(r.rhs), r.effective_action(), r.line))
    return TaggedCfg(main + out, g.start)


# -- simple form -----------------------------------------------------------------

def to_simple_form(g: TaggedCfg, fresh: Fresh) -> list:
    """Replace bracketed substrings, innermost first, by matched tokens.

    Identical bracket bodies share one generated nonterminal.
    """
    made: dict = {}
    extra: list = []
    rules: list = []
    for r in g.rules:
        if any(isinstance(i, Group) for i in r.rhs):
            raise TranslationError(f"rule for {r.head!r} still has a group; desugar first")
        frames: list = [[]]
        calls: list = []
        for it in r.rhs:
            if isinstance(it, Terminal) and it.kind is Kind.CALL:
                calls.append(it)
                frames.append([])
            elif isinstance(it, Terminal) and it.kind is Kind.RETURN:
                if not calls:
                    raise UnbalancedBrackets(f"rule {r}: return {it.display} has no call")
                body = tuple(frames.pop())
                name = made.get(body)
                if name is None:
                    name = made[body] = fresh(f"body {_body_str(body)}")
                    extra.append(TRule(name, body, None))
                frames[-1].append(MatchedToken(calls.pop(), name, it))
            else:
                frames[-1].append(it)
        if calls:
            raise UnbalancedBrackets(f"rule {r}: call {calls[-1].display} has no return")
        rules.append(TRule(r.head, tuple(frames[0]), r.action if r.action is not None else r.effective_action()))
    return rules + extra


# -- validation -------------------------------------------------------------------

def _nullable(rules) -> frozenset:
    nullable: set = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head not in nullable and all(isinstance(x, str) and x in nullable for x in r.rhs):
                nullable.add(r.head)
                changed = True
    return frozenset(nullable)


def dependency_graph(rules) -> nx.MultiDiGraph:
    """Edges ``(L, L')`` tagged ``kind`` (matched / tail / other) and ``nullable_prefix``."""
    nullable = _nullable(rules)
    G = nx.MultiDiGraph()
    for r in rules:
        G.add_node(r.head)
        n = len(r.rhs)
        for p, x in enumerate(r.rhs):
            if isinstance(x, MatchedToken):
                G.add_edge(r.head, x.inner, kind="matched", nullable_prefix=False)
            elif isinstance(x, str):
                pre = all(isinstance(y, str) and y in nullable for y in r.rhs[:p])
                G.add_edge(r.head, x, kind="tail" if p == n - 1 else "other", nullable_prefix=pre)
    return G


def _witness(G, src, dst) -> list:
    back = nx.shortest_path(G, dst, src)
    return [src] + back


def validate(rules) -> None:
    """Accept iff every dependency cycle goes through a matched token or is
    made of tail references only, at least one behind a non-nullable prefix.

    Raises :class:`LeftRecursionLike` or :class:`NonTailCycle` with a cycle.
    """
    G = dependency_graph(rules)
    H = nx.MultiDiGraph()
    H.add_nodes_from(G.nodes)
    H.add_edges_from((u, v, d) for u, v, d in G.edges(data=True) if d["kind"] != "matched")
    simple = nx.DiGraph(H)
    for comp in sorted(nx.strongly_connected_components(simple), key=lambda c: sorted(c)):
        sub = H.subgraph(comp)
        if len(comp) == 1:
            (x,) = comp
            if not sub.has_edge(x, x):
                continue
        for u, v, d in sorted(sub.edges(data=True), key=lambda e: (e[0], e[1], e[2]["kind"])):
            if d["kind"] == "other":
                cyc = _witness(nx.DiGraph(sub), u, v)
                if d["nullable_prefix"]:
                    raise LeftRecursionLike("left-recursive reference", cyc)
                raise NonTailCycle("cycle through a non-tail reference", cyc)
        nt = nx.DiGraph()
        nt.add_edges_from((u, v) for u, v, d in sub.edges(data=True) if d["nullable_prefix"])
        try:
            cyc = nx.find_cycle(nt)
        except nx.NetworkXNoCycle:
            continue
        raise LeftRecursionLike("cycle of tail references behind nullable prefixes",
                                [u for u, _ in cyc] + [cyc[0][0]])


# -- linear form ----------------------------------------------------------------------

def is_linear(rhs: tuple) -> bool:
    if not rhs:
        return True
    body = rhs[:-1] if isinstance(rhs[-1], str) else rhs
    return bool(body) and not any(isinstance(x, str) for x in body)


def _deps(r: TRule) -> set:
    """Nonterminals that must be finished before ``r`` can be rewritten."""
    if is_linear(r.rhs):
        return set()
    n = len(r.rhs)
    out = set()
    for p, x in enumerate(r.rhs):
        if isinstance(x, str) and (p < n - 1 or p == 0):
            out.add(x)
    return out


def iteration_cap() -> int:
    v = os.environ.get("VPG_ITER_CAP")
    return int(v) if v else DEFAULT_ITER_CAP


def to_linear_form(rules: list, fresh: Fresh, cap: Optional[int] = None) -> tuple:
    """Sink elimination.  Returns ``(rules, T)`` where ``T`` maps each
    generated suffix nonterminal to the string it abbreviates."""
    cap = iteration_cap() if cap is None else cap
    table: dict = {}
    order: list = []
    for r in rules:
        if r.head not in table:
            table[r.head] = []
            order.append(r.head)
        if r not in table[r.head]:
            table[r.head].append(r)
    eps_only = {h for h, rs in table.items() if all(not r.rhs for r in rs)}
    T: dict = {}
    T_inv: dict = {}
    done: set = set()
    rounds = 0
    while len(done) < len(order):
        rounds += 1
        if rounds > cap:
            raise IterationCapExceeded(f"no linear form after {cap} rounds")
        sink = None
        for h in order:
            if h in done:
                continue
            deps = set()
            for r in table[h]:
                if r.rhs and r.rhs[0] == h:
                    raise InternalNonSink(f"rule {h} -> {_body_str(r.rhs)} refers to its own head first")
                deps |= _deps(r)
            if deps <= done:
                sink = h
                break
        if sink is None:
            raise InternalNonSink("dependency graph has no sink among unfinished nonterminals")
        work = list(table[sink])
        out: list = []
        finished = True
        while work:
            r = work.pop(0)
            if is_linear(r.rhs):
                if r not in out:
                    out.append(r)
                continue
            rhs = r.rhs
            if isinstance(rhs[0], str):
                lp, s = rhs[0], rhs[1:]
                if lp not in done:
                    out.append(r)
                    out.extend(work)
                    finished = False
                    break
                new = []
                for rr in table[lp]:
                    body, act = rr.rhs + s, rr.action
                    if (s and rr.rhs and isinstance(rr.rhs[-1], str) and rr.rhs[-1] in eps_only
                            and isinstance(act, Default) and act.arity > 0):
                        body, act = rr.rhs[:-1] + s, Default(act.head, act.arity - 1)
                    new.append(TRule(sink, body, compose(r.action, act)))
                work[0:0] = new
            else:
                j = next(i for i, x in enumerate(rhs) if isinstance(x, str))
                suffix = rhs[j:]
                name = T_inv.get(suffix)
                if name is None:
                    name = fresh(f"suffix {_body_str(suffix)}")
                    T[name] = suffix
                    T_inv[suffix] = name
                    table[name] = [TRule(name, suffix, None)]
                    order.append(name)
                out.append(TRule(sink, rhs[:j] + (name,), r.action))
        table[sink] = out
        if finished:
            done.add(sink)
    result = [r for h in order for r in table[h]]
    return result, T


# -- VPG emission ------------------------------------------------------------------------

def linear_to_vpg(rules: list, start: str, fresh: Fresh) -> tuple:
    """Chain each linear rule into VPG rules; returns ``(Vpg, actions)``.

    Only the first rule of a chain carries the action.  Bodies without a
    trailing nonterminal end in one shared ε nonterminal.  When two linear
    rules would produce the same VPG rule with different actions, the later
    one is routed through a copy of its target so both parses survive.
    """
    out: list = []
    actions: dict = {}
    end: list = []
    clashes: list = []

    def end_nt():
        if not end:
            end.append(fresh("end of rule"))
        return end[0]

    def make(head, item, target):
        if isinstance(item, MatchedToken):
            return Matching(head, item.call, item.inner, item.ret, target)
        return Linear(head, item, target)

    def add(rule, act, item=None, target=None):
        if rule in actions:
            if actions[rule] != act:
                clashes.append((rule.head, item, target, act))
            return
        actions[rule] = act
        out.append(rule)

    for r in rules:
        if not r.rhs:
            add(Empty(r.head), r.action)
            continue
        tail = r.rhs[-1] if isinstance(r.rhs[-1], str) else None
        items = r.rhs[:-1] if tail is not None else r.rhs
        cur = r.head
        for i, it in enumerate(items):
            last = i == len(items) - 1
            nxt = (tail if tail is not None else end_nt()) if last else fresh(f"chain of {r.head}")
            add(make(cur, it, nxt), r.action if i == 0 else None, it, nxt)
            cur = nxt
    if end:
        add(Empty(end[0]), None)
    for head, item, target, act in clashes:
        alias = fresh(f"copy of {target}")
        for rr in [x for x in out if x.head == target]:
            if isinstance(rr, Empty):
                add(Empty(alias), actions[rr])
            elif isinstance(rr, Linear):
                add(Linear(alias, rr.term, rr.target), actions[rr])
            else:
                add(Matching(alias, rr.call, rr.inner, rr.ret, rr.after), actions[rr])
        add(make(head, item, alias), act)
    g = Vpg(out, start)
    check_vpg_wellformed(g)
    return g, {r: actions[r] for r in out}


# -- pipeline ---------------------------------------------------------------------------------

@dataclass
class Translation:
    source: TaggedCfg
    desugared: TaggedCfg
    simple: list
    linear: list
    T: dict
    vpg: Vpg
    actions: dict
    notes: dict = field(default_factory=dict)

    def simple_text(self) -> str:
        return self._header(self.simple) + format_cfg_rules(self.simple, self.source.start, _action_note)

    def linear_text(self) -> str:
        return self._header(self.linear) + format_cfg_rules(self.linear, self.source.start, _action_note)

    def vpg_text(self) -> str:
        comments = {r: None if a is None else "@" + str(a) for r, a in self.actions.items()}
        return self._header(self.vpg.rules) + format_vpg(self.vpg, comments)

    def _header(self, rules) -> str:
        heads = {r.head for r in rules}
        names = sorted((n for n in self.notes if n in heads), key=lambda n: int(n[2:]))
        return "".join(f"# {n}: {self.notes[n]}\n" for n in names)

    def stage_lines(self, stage: str) -> list:
        """Rules of one stage (``simple``, ``linear`` or ``vpg``) as
        ``head -> body  @action`` lines, in rule order."""
        if stage == "vpg":
            return [_line(str(r), a) for r, a in self.actions.items()]
        rules = {"simple": self.simple, "linear": self.linear}[stage]
        return [_line(f"{r.head} -> {_body_str(r.rhs)}", r.action) for r in rules]

    def action_table(self) -> list:
        """``[(rule index, rule text, action text or None)]`` in VPG rule order."""
        return [(i, str(r), None if a is None else str(a)) for i, (r, a) in enumerate(self.actions.items())]


def _line(text: str, a) -> str:
    return text if a is None else f"{text}  @{a}"


def _action_note(r) -> Optional[str]:
    return None if r.action is None else "@" + str(r.action)


def translate(g: TaggedCfg, *, cap: Optional[int] = None) -> Translation:
    """Run the whole pipeline; raises on validation failure."""
    fresh = Fresh(g.nonterminals)
    d = desugar_regex_ops(g, fresh)
    simple = to_simple_form(d, fresh)
    validate(simple)
    linear, T = to_linear_form(simple, fresh, cap)
    vpg, actions = linear_to_vpg(linear, g.start, fresh)
    return Translation(g, d, simple, linear, T, vpg, actions, fresh.notes)
