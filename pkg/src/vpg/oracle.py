"""Reference derivation relations used as ground truth in tests.

Nothing here is tuned for speed.  The big-step enumerator works top-down on
substrings, the small-step relation adds one edge per token, and the CFG
check runs a plain Earley chart over the tagged CFG with terminals compared
by name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .edges import CALL, PLAIN, RET, Edge
from .grammar import Group, Kind, Terminal, TaggedCfg, Vpg

F, T = False, True


class BoundExceeded(Exception):
    """The input is longer than the caller's bound."""


@dataclass(frozen=True)
class DerivationQuery:
    start: tuple       # tagged nonterminal (name, tag)
    input: tuple
    bound: int

    def __post_init__(self):
        if self.bound < len(self.input):
            raise ValueError("bound must be at least the input length")


def _kinds(g: Vpg, w: Sequence[str]) -> Optional[tuple]:
    out = []
    for x in w:
        t = g.terminals.get(x)
        if t is None:
            return None
        out.append(t.kind)
    return tuple(out)


def _match_positions(kinds: tuple) -> dict:
    """Call position -> position of its matching return (well-nested pairs only)."""
    stack: list = []
    out = {}
    for i, k in enumerate(kinds):
        if k is Kind.CALL:
            stack.append(i)
        elif k is Kind.RETURN and stack:
            out[stack.pop()] = i
    return out


class BigStep:
    """Memoised big-step enumerator; one instance may be reused across inputs."""

    def __init__(self, g: Vpg):
        self.g = g
        self.memo: dict = {}

    def trees(self, L: str, u: bool, w: Sequence[str]) -> frozenset:
        w = tuple(w)
        return self._go(L, u, w)

    def _go(self, L, u, w) -> frozenset:
        key = (L, u, w)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        g = self.g
        out: set = set()
        if not w:
            if L in g.eps:
                out.add(())
            self.memo[key] = res = frozenset(out)
            return res
        t = g.terminals.get(w[0])
        if t is None:
            self.memo[key] = res = frozenset()
            return res
        x, rest = w[0], w[1:]
        if t.kind is Kind.PLAIN:
            for l1 in g.plain_next.get((L, x), ()):
                e = Edge(PLAIN, (L, u), x, (l1, u))
                out.update((e,) + v for v in self._go(l1, u, rest))
        elif t.kind is Kind.CALL:
            if not u:
                for l1 in g.pending_call.get((L, x), ()):
                    e = Edge(CALL, (L, F), x, (l1, F))
                    out.update((e,) + v for v in self._go(l1, F, rest))
            alts = g.matching.get((L, x), ())
            if alts:
                k = _match_positions(_kinds(g, w) or ()).get(0)
                if k is not None:
                    w1, b, w2 = w[1:k], w[k], w[k + 1:]
                    for (l1, rb, l2) in alts:
                        if rb != b:
                            continue
                        inner = self._go(l1, T, w1)
                        if not inner:
                            continue
                        after = self._go(l2, u, w2)
                        if not after:
                            continue
                        ec = Edge(CALL, (L, u), x, (l1, T))
                        er = Edge(RET, ((L, u), (l1, T)), b, (l2, u))
                        for v1 in inner:
                            for v2 in after:
                                out.add((ec,) + v1 + (er,) + v2)
        elif not u:
            for l1 in g.pending_ret.get((L, x), ()):
                e = Edge(RET, (L, F), x, (l1, F))
                out.update((e,) + v for v in self._go(l1, F, rest))
        self.memo[key] = res = frozenset(out)
        return res


def bigstep_enumerate(g: Vpg, start: tuple, w: Sequence[str]) -> frozenset:
    """All trees ``v`` with ``(Lᵘ, w, v)`` derivable; ``start`` is ``(L, u)``."""
    return BigStep(g).trees(start[0], start[1], w)


# -- small step ---------------------------------------------------------------

def smallstep_extend(g: Vpg, v: tuple, E: tuple, i: str, *, first: Optional[tuple] = None) -> set:
    """Every ``(v', E')`` one small step away from ``(v, E)`` on token ``i``.

    ``E`` is a tuple of call edges, top first.  When ``v`` is empty any
    nonterminal may start the tree; ``first`` restricts that choice to one
    tagged nonterminal, which is how callers apply the firstNT filter early.
    """
    t = g.terminals.get(i)
    if t is None:
        return set()
    if v:
        heads = [v[-1].dst]
    elif first is not None:
        heads = [first]
    else:
        heads = [(L, u) for L in sorted(g.nonterminals) for u in (F, T)]
    out = set()
    if t.kind is Kind.PLAIN:
        for (L, u) in heads:
            for l1 in g.plain_next.get((L, i), ()):
                out.add((v + (Edge(PLAIN, (L, u), i, (l1, u)),), E))
    elif t.kind is Kind.CALL:
        for (L, u) in heads:
            if not u:
                for l1 in g.pending_call.get((L, i), ()):
                    e = Edge(CALL, (L, F), i, (l1, F))
                    out.add((v + (e,), (e,) + E))
            for (l1, _b, _l2) in g.matching.get((L, i), ()):
                e = Edge(CALL, (L, u), i, (l1, T))
                out.add((v + (e,), (e,) + E))
    else:
        top = E[0] if E else None
        if top is None or not top.dst[1]:
            # pending return; pops a pending call if there is one
            for (L, u) in heads:
                if u:
                    continue
                for l1 in g.pending_ret.get((L, i), ()):
                    out.add((v + (Edge(RET, (L, F), i, (l1, F)),), E[1:]))
        elif v and v[-1].dst[1] and v[-1].dst[0] in g.eps:
            (L, u), (l1, _) = top.src, top.dst
            for l2 in g.match_after.get((L, top.sym, l1, i), ()):
                out.add((v + (Edge(RET, ((L, u), (l1, T)), i, (l2, u)),), E[1:]))
    return out


def smallstep_closure(g: Vpg, w: Sequence[str], *, first: Optional[tuple] = None) -> set:
    """All ``(v, E)`` with ``([], ⊥) ->* (v, E)`` over ``w``."""
    S = {((), ())}
    for i in w:
        nxt: set = set()
        for v, E in S:
            nxt |= smallstep_extend(g, v, E, i, first=first)
        S = nxt
    return S


def complete(g: Vpg, v: tuple) -> bool:
    """Ends at ``L1ᶠ`` with ``L1 -> ε``."""
    if not v:
        return g.start in g.eps
    d = v[-1].dst
    return not d[1] and d[0] in g.eps


def smallstep_trees(g: Vpg, w: Sequence[str]) -> frozenset:
    """Complete trees from the small-step closure starting at ``L0ᶠ``."""
    if not w:
        return frozenset([()]) if g.start in g.eps else frozenset()
    S = smallstep_closure(g, w, first=(g.start, F))
    return frozenset(v for v, _ in S if complete(g, v))


# -- CFG membership -------------------------------------------------------------

def _flatten_cfg(g: TaggedCfg) -> tuple:
    """Rules as ``(head, tuple of items)`` with groups replaced by fresh heads."""
    out: list = []
    n = [0]

    def fresh():
        n[0] += 1
        return ("\x00g", n[0])

    def seq(items) -> tuple:
        res = []
        for it in items:
            if isinstance(it, Group):
                h = fresh()
                alts = [seq(a) for a in it.alternatives]
                if it.op is None:
                    out.extend((h, a) for a in alts)
                elif it.op == "?":
                    out.extend((h, a) for a in alts)
                    out.append((h, ()))
                else:
                    star = fresh()
                    out.extend((star, a + (star,)) for a in alts)
                    out.append((star, ()))
                    if it.op == "*":
                        out.append((h, (star,)))
                    else:
                        out.extend((h, a + (star,)) for a in alts)
                res.append(h)
            elif isinstance(it, Terminal):
                res.append(it)
            else:
                res.append(it)
        return tuple(res)

    for r in g.rules:
        out.append((r.head, seq(r.rhs)))
    return tuple(out)


def cfg_derive_enumerate(g: TaggedCfg, w: Sequence[str], bound: int = 16) -> bool:
    """Does the start symbol derive ``w`` (terminals compared by name)?

    Raises :class:`BoundExceeded` if ``w`` is longer than ``bound``.
    """
    w = tuple(w)
    if len(w) > bound:
        raise BoundExceeded(f"input length {len(w)} exceeds bound {bound}")
    rules = _flatten_cfg(g)
    by_head: dict = {}
    for h, body in rules:
        by_head.setdefault(h, []).append(body)
    # nullable heads, for the empty-completion shortcut
    nullable: set = set()
    changed = True
    while changed:
        changed = False
        for h, body in rules:
            if h not in nullable and all((not isinstance(x, Terminal)) and x in nullable for x in body):
                nullable.add(h)
                changed = True

    START = "\x00S"
    chart = [set() for _ in range(len(w) + 1)]
    chart[0].add((START, (g.start,), 0, 0))
    for k in range(len(w) + 1):
        work = list(chart[k])
        while work:
            item = work.pop()
            head, body, dot, origin = item
            if dot < len(body):
                x = body[dot]
                if isinstance(x, Terminal):
                    if k < len(w) and w[k] == x.name:
                        chart[k + 1].add((head, body, dot + 1, origin))
                    continue
                for b in by_head.get(x, ()):
                    new = (x, b, 0, k)
                    if new not in chart[k]:
                        chart[k].add(new)
                        work.append(new)
                if x in nullable:
                    new = (head, body, dot + 1, origin)
                    if new not in chart[k]:
                        chart[k].add(new)
                        work.append(new)
            else:
                for (h2, b2, d2, o2) in list(chart[origin]):
                    if d2 < len(b2) and b2[d2] == head:
                        new = (h2, b2, d2 + 1, o2)
                        if new not in chart[k]:
                            chart[k].add(new)
                            work.append(new)
    return (START, (g.start,), 1, 0) in chart[len(w)]


# -- parsing invariants -----------------------------------------------------------

class InvariantResult:
    def __init__(self, ok: bool, clause: int = 0, position: int = -1, detail: str = ""):
        self.ok = ok
        self.clause = clause
        self.position = position
        self.detail = detail

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "InvariantResult(ok)"
        return f"InvariantResult(clause={self.clause}, position={self.position}, {self.detail})"


def check_parse_invariants(g: Vpg, w: Sequence[str], trace: Iterable, V_steps: Optional[list] = None) -> InvariantResult:
    """Check the three parsing invariants after every token.

    ``trace`` is ``[(m, T), ...]`` with ``T`` a tuple of call states, top
    last (as :func:`vpg.parser.run_parser` records it, resolved to sets).
    ``V_steps`` gives the extracted tree set after each prefix; when omitted
    it is computed with :func:`vpg.extract.extract_step`.
    """
    from .extract import extract_first, extract_step

    trace = list(trace)
    w = tuple(w)
    if len(trace) != len(w):
        return InvariantResult(False, 0, -1, "trace length differs from input length")
    S = {((), ())}
    V = None
    first = (g.start, F)
    for i, (x, (m, stack)) in enumerate(zip(w, trace)):
        k = {Kind.PLAIN: PLAIN, Kind.CALL: CALL, Kind.RETURN: RET}[g.terminals[x].kind]
        if V_steps is not None:
            V = V_steps[i]
        elif V is None:
            V = extract_first(m, k)
        else:
            V = extract_step(g, V, m, k)
        nxt: set = set()
        for v, E in S:
            nxt |= smallstep_extend(g, v, E, x)
        S = nxt
        ref = {(v, E) for v, E in S if v[0].src == first}
        if set(V) != ref:
            extra = len(set(V) - ref)
            missing = len(ref - set(V))
            return InvariantResult(False, 1, i, f"{extra} extra, {missing} missing")
        for v, E in V:
            if not E:
                if stack:
                    return InvariantResult(False, 2, i, "empty edge stack but parser stack non-empty")
            elif not stack or E[0] not in stack[-1]:
                return InvariantResult(False, 2, i, "top call edge not in top parser state")
            if v[-1] not in m:
                return InvariantResult(False, 3, i, "last edge not in current state")
    return InvariantResult(True)


# -- CFG tree conformance ---------------------------------------------------------

def _eps_only(g: TaggedCfg) -> frozenset:
    return frozenset(h for h in g.nonterminals
                     if g.rules_of.get(h) and all(not r.rhs for r in g.rules_of[h]))


def cfg_tree_conforms(g: TaggedCfg, tree) -> Optional[str]:
    """Check that ``tree`` applies rules of ``g`` at every node.

    A node's children must spell out the body of one of its rules, with
    groups read as regular expressions over the children.  A child for a
    nonterminal whose only rule is ``ε`` may be missing, because the
    translator drops such trailing children when it folds rules together.
    Returns None when the tree conforms, else a description of the first bad
    node.
    """
    from .actions import Node, Token

    eps_only = _eps_only(g)
    bad: list = []

    def items_end(items, ch, starts) -> set:
        cur = set(starts)
        for it in items:
            cur = item_end(it, ch, cur)
            if not cur:
                break
        return cur

    def item_end(it, ch, starts) -> set:
        out = set()
        if isinstance(it, Terminal):
            for p in starts:
                if p < len(ch) and isinstance(ch[p], Token) and ch[p].name == it.name:
                    out.add(p + 1)
        elif isinstance(it, str):
            for p in starts:
                if p < len(ch) and isinstance(ch[p], Node) and ch[p].label == it and node_ok(ch[p]):
                    out.add(p + 1)
                if it in eps_only:
                    out.add(p)
        else:
            once = set()
            for alt in it.alternatives:
                once |= items_end(alt, ch, starts)
            if it.op is None:
                return once
            if it.op == "?":
                return once | set(starts)
            reach = set(once) if it.op == "+" else set(starts) | once
            frontier = set(once)
            while frontier:
                nxt = set()
                for alt in it.alternatives:
                    nxt |= items_end(alt, ch, frontier)
                frontier = nxt - reach
                reach |= frontier
            return reach
        return out

    memo: dict = {}

    def node_ok(n) -> bool:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        ok = any(len(n.children) in items_end(r.rhs, n.children, {0}) for r in g.rules_of.get(n.label, ()))
        memo[id(n)] = ok
        if not ok and not bad:
            bad.append(n)
        return ok

    if not isinstance(tree, Node) or tree.label != g.start:
        return "root is not the start symbol"
    if node_ok(tree):
        return None
    n = bad[-1] if bad else tree
    return f"node {n.label} with {len(n.children)} children matches no rule"
