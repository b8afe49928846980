"""Parser PDA: derivatives over sets of tagged edges, table construction and runs.

States are frozensets of :class:`~vpg.edges.Edge`.  Every state apart from the
helper start state holds edges of a single family.  Tables are keyed by
integer state ids:

* ``plain[(sid, c)] -> sid'``
* ``call[(sid, a)] -> sid'`` (the new state itself is pushed)
* ``ret[(sid, b, top)] -> sid'`` where ``top`` is the id of the stacked call
  state, or ``-1`` when the stack is empty.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from .edges import CALL, PLAIN, RET, START, START_NT, Edge
from .grammar import Kind, Mode, Vpg

F, T = False, True


class ParseFailure(Exception):
    def __init__(self, position: int, reason: str = "no viable edge"):
        super().__init__(f"parse failed at token {position}: {reason}")
        self.position = position
        self.reason = reason


def start_state(g: Vpg) -> frozenset:
    return frozenset([Edge(START, (START_NT, F), "", (g.start, F))])


def family(m) -> Optional[int]:
    for e in m:
        return e.kind
    return None


def p_plain(g: Vpg, m, c: str) -> frozenset:
    nxt = g.plain_next
    return frozenset(Edge(PLAIN, e.dst, c, (l1, e.dst[1]))
                     for e in m for l1 in nxt.get((e.dst[0], c), ()))


def p_call(g: Vpg, m, a: str) -> frozenset:
    out = set()
    for e in m:
        L, u = e.dst
        for (l1, _b, _l2) in g.matching.get((L, a), ()):
            out.add(Edge(CALL, e.dst, a, (l1, T)))
        if not u:
            for l1 in g.pending_call.get((L, a), ()):
                out.add(Edge(CALL, e.dst, a, (l1, F)))
    return frozenset(out)


def p_ret(g: Vpg, m, mcall, b: str) -> frozenset:
    out = set()
    for ce in mcall:
        if ce.dst[1]:
            L, u = ce.src
            for l2 in g.match_after.get((L, ce.sym, ce.dst[0], b), ()):
                out.add(Edge(RET, (ce.src, ce.dst), b, (l2, u)))
    for e in m:
        L, u = e.dst
        if not u:
            for l1 in g.pending_ret.get((L, b), ()):
                out.add(Edge(RET, e.dst, b, (l1, F)))
    return frozenset(out)


class ParserPda:
    def __init__(self, g: Vpg, states, plain, call, ret):
        self.g = g
        self.states: list = states
        self.index = {s: i for i, s in enumerate(states)}
        self.plain = plain
        self.call = call
        self.ret = ret
        self.start = 0
        self.empty = self.index.get(frozenset())

    @property
    def call_states(self) -> list:
        return [i for i, s in enumerate(self.states) if family(s) == CALL]

    def __repr__(self):
        return f"ParserPda(states={len(self.states)}, transitions={len(self.plain) + len(self.call) + len(self.ret)})"


def build_parser_pda(g: Vpg) -> ParserPda:
    m0 = start_state(g)
    states = [m0]
    index = {m0: 0}
    fresh: list = []

    def intern(s):
        i = index.get(s)
        if i is None:
            i = index[s] = len(states)
            states.append(s)
            fresh.append(i)
        return i

    plains, calls, returns = g.plains, g.calls, g.returns
    plain_t, call_t, ret_t = {}, {}, {}
    done = set()
    new = [0]
    while new:
        fresh = []
        for sid in new:
            m = states[sid]
            for c in plains:
                plain_t[(sid, c)] = intern(p_plain(g, m, c))
            for a in calls:
                call_t[(sid, a)] = intern(p_call(g, m, a))
        known = len(states)
        tops = [-1] + [i for i in range(known) if family(states[i]) == CALL]
        for sid in range(known):
            m = states[sid]
            for top in tops:
                if (sid, top) in done:
                    continue
                done.add((sid, top))
                mcall = states[top] if top >= 0 else frozenset()
                for b in returns:
                    ret_t[(sid, b, top)] = intern(p_ret(g, m, mcall, b))
        new = fresh
    return ParserPda(g, states, plain_t, call_t, ret_t)


class ParseForest(NamedTuple):
    """Token-aligned forest: ``ids[i]`` indexes ``pda.states`` and
    ``kinds[i]`` is the edge family at position i."""
    pda: ParserPda
    tokens: tuple
    ids: list
    kinds: list
    stack: tuple      # final parser stack, state ids bottom first

    def state(self, i: int) -> frozenset:
        return self.pda.states[self.ids[i]]

    def states(self) -> list:
        return [self.pda.states[i] for i in self.ids]

    def __len__(self):
        return len(self.ids)


class ParseRun(NamedTuple):
    forest: ParseForest
    trace: list       # [(state id, stack tuple)] after each token


_KIND = {Kind.PLAIN: PLAIN, Kind.CALL: CALL, Kind.RETURN: RET}


def run_parser(pda: ParserPda, tokens: Sequence[str], *, record: bool = False):
    """Thread ``(m, T)`` through the tokens and collect the forest.

    Raises :class:`ParseFailure` at the first position whose state is empty.
    With ``record=True`` a :class:`ParseRun` including every intermediate
    stack is returned instead of the bare forest.
    """
    g = pda.g
    terms = g.terminals
    plain, call, ret = pda.plain, pda.call, pda.ret
    empty = pda.empty
    sid = pda.start
    stack: list = []
    ids: list = []
    kinds: list = []
    trace: list = []
    for pos, name in enumerate(tokens):
        t = terms.get(name)
        if t is None:
            raise ParseFailure(pos, f"unknown terminal {name!r}")
        k = t.kind
        if k is Kind.PLAIN:
            sid = plain[(sid, name)]
            kinds.append(PLAIN)
        elif k is Kind.CALL:
            sid = call[(sid, name)]
            stack.append(sid)
            kinds.append(CALL)
        else:
            top = stack.pop() if stack else -1
            sid = ret[(sid, name, top)]
            kinds.append(RET)
        if sid == empty:
            raise ParseFailure(pos)
        ids.append(sid)
        if record:
            trace.append((sid, tuple(stack)))
    forest = ParseForest(pda, tuple(tokens), ids, kinds, tuple(stack))
    if record:
        return ParseRun(forest, trace)
    return forest


def final_ok(pda: ParserPda, forest: ParseForest) -> bool:
    """EOF check before pruning: some edge ends at ``L1ᶠ`` with ``L1 -> ε``."""
    g = pda.g
    if not forest.ids:
        return g.start in g.eps
    if g.mode is not Mode.GENERAL and forest.stack:
        return False
    return any((not e.dst[1]) and e.dst[0] in g.eps for e in forest.state(len(forest) - 1))


def format_forest(states) -> str:
    from .edges import format_edge, sorted_edges
    lines = []
    for i, m in enumerate(states, 1):
        lines.append(f"m{i}:")
        for e in sorted_edges(m):
            lines.append("  " + format_edge(e))
    return "\n".join(lines)
