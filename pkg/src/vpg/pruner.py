"""Backward pruner PDA and the context refinement pass.

The pruner walks the forest from the last position to the first.  Its state is
the pruned version of the position to the right; its stack holds pruned return
states so a call edge can be checked against the return edges that close it.

The four local clauses can leave edges that lie on no complete tree (for
instance a return edge whose call edge was dropped for an unrelated reason).
:class:`Refiner` removes them with a forward reachability pass and a
backward usefulness pass over ``(opener edge, edge)`` pairs, where the opener
is the call edge that opened the current nesting level.  Both passes memoise
their transitions on interned set ids, so each token costs a few dictionary
lookups once the caches are warm.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .edges import CALL, PLAIN, RET, START, START_NT, Edge
from .grammar import Vpg
from .parser import ParseForest, ParserPda, family

NOOP, PUSH, POP = "noop", "push", "pop"
EMPTY = frozenset()


class EmptyAfterPrune(Exception):
    def __init__(self, position: int):
        super().__init__(f"no complete parse tree: pruning emptied position {position}")
        self.position = position


# -- transition functions ----------------------------------------------------

def prune_last(g: Vpg, mn) -> frozenset:
    eps = g.eps
    return frozenset(e for e in mn if not e.dst[1] and e.dst[0] in eps)


def prune_step(g: Vpg, m1, m2p, top=EMPTY, fam1: Optional[int] = None, fam2: Optional[int] = None):
    """One backward step: returns ``(m1', action)``.

    ``top`` is the pruned return state on top of the pruner stack (``∅`` for
    the empty stack); it is only read when ``m1`` is a call state followed by
    a plain or call state, in which case the action is ``POP``.
    """
    fam1 = family(m1) if fam1 is None else fam1
    fam2 = family(m2p) if fam2 is None else fam2
    if fam1 is None or fam2 is None:
        # an empty side keeps nothing; the caller reports the failure
        if fam1 == CALL and fam2 in (PLAIN, CALL):
            return EMPTY, POP
        if fam1 in (PLAIN, RET) and fam2 == RET:
            return EMPTY, PUSH
        return EMPTY, NOOP
    eps = g.eps
    starts = {e.src for e in m2p}
    if fam1 != CALL:
        if fam2 != RET:
            # clause 1
            return frozenset(e for e in m1 if e.dst in starts), NOOP
        # clause 2
        keep = frozenset(e for e in m1
                         if (e.dst in starts if not e.dst[1] else e.dst[0] in eps))
        return keep, PUSH
    if fam2 != RET:
        # clause 3
        closing = {e.src for e in top}
        keep = frozenset(e for e in m1 if e.dst in starts and
                         (not e.dst[1] or (e.src, e.dst) in closing))
        return keep, POP
    # clause 4
    keep = frozenset(e for e in m1
                     if (e.dst in starts if not e.dst[1]
                         else (e.src, e.dst) in starts and e.dst[0] in eps))
    return keep, NOOP


# -- table construction ------------------------------------------------------

class PrunerPda:
    """Pruner tables over its own state ids.

    ``states[i]`` is a pruned (or unpruned) parser state; ``of_parser`` maps a
    parser state id to the id of the same set here.  ``last[p]`` gives the id
    of ``g_ε(m)`` for parser id ``p``; ``step[(p, s2)]`` gives
    ``(s1, action)`` for clauses 1, 2 and 4; ``step3[(p, s2, top)]`` gives
    ``s1`` for clause 3 (``top`` is ``-1`` for the empty stack).
    """

    def __init__(self, parser: ParserPda, states, of_parser, last, step, step3):
        self.parser = parser
        self.g = parser.g
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.of_parser = of_parser
        self.last = last
        self.step = step
        self.step3 = step3
        self.empty = self.index.get(EMPTY, -2)
        self.refiner = Refiner(self.g)

    def __repr__(self):
        return (f"PrunerPda(states={len(self.states)}, transitions="
                f"{len(self.last) + len(self.step) + len(self.step3)})")


def _compatible(m1, fam1, m2p, fam2) -> bool:
    """Could ``m2p`` be the pruned successor of ``m1`` in some forest?"""
    dsts = {e.dst for e in m1}
    if fam2 != RET:
        return all(e.src in dsts for e in m2p)
    pairs = {(e.src, e.dst) for e in m1} if fam1 == CALL else None
    for e in m2p:
        if isinstance(e.src[0], tuple):
            if pairs is not None and e.src not in pairs:
                return False
        elif e.src not in dsts:
            return False
    return True


def _top_compatible(m1, top) -> bool:
    pairs = {(e.src, e.dst) for e in m1}
    return all(e.src in pairs for e in top if isinstance(e.src[0], tuple))


def build_pruner_pda(parser: ParserPda) -> PrunerPda:
    """Least fixpoint over parser states (G0) and pruned states (G1).

    Entries are generated only for state pairs that can be adjacent in a
    forest and, for clause 3, only for stacked return states whose matching
    edges close calls of the current state.  Other keys never occur at run
    time.
    """
    g = parser.g
    g0 = [i for i, m in enumerate(parser.states) if m and family(m) != START]
    states: list = []
    index: dict = {}
    fresh: list = []

    def intern(s):
        i = index.get(s)
        if i is None:
            i = index[s] = len(states)
            states.append(s)
            fresh.append(i)
        return i

    of_parser = {p: intern(parser.states[p]) for p in g0}
    last = {p: intern(prune_last(g, parser.states[p])) for p in g0}
    fam = {}
    for p in g0:
        fam[p] = family(parser.states[p])

    step, step3 = {}, {}
    new = list(range(len(states)))
    ret_done: set = set()
    while new:
        fresh = []
        for s2 in new:
            m2p = states[s2]
            if not m2p:
                continue
            f2 = family(m2p)
            for p in g0:
                m1, f1 = parser.states[p], fam[p]
                if not _compatible(m1, f1, m2p, f2):
                    continue
                if f1 == CALL and f2 != RET:
                    continue
                m1p, act = prune_step(g, m1, m2p, EMPTY, f1, f2)
                step[(p, s2)] = (intern(m1p), act)
        # clause 3 over all known targets and all stacked return states
        rets = [-1] + [i for i, s in enumerate(states) if s and family(s) == RET]
        for s2, m2p in enumerate(list(states)):
            if not m2p or family(m2p) == RET:
                continue
            f2 = family(m2p)
            for p in g0:
                if fam[p] != CALL:
                    continue
                m1 = parser.states[p]
                if not _compatible(m1, CALL, m2p, f2):
                    continue
                for top in rets:
                    if (p, s2, top) in ret_done:
                        continue
                    ret_done.add((p, s2, top))
                    mt = states[top] if top >= 0 else EMPTY
                    if top >= 0 and not _top_compatible(m1, mt):
                        continue
                    m1p, _ = prune_step(g, m1, m2p, mt, CALL, f2)
                    step3[(p, s2, top)] = intern(m1p)
        new = fresh
    return PrunerPda(parser, states, of_parser, last, step, step3)


# -- running -----------------------------------------------------------------

class PrunedForest(NamedTuple):
    tokens: tuple
    states: list      # frozensets of edges, forward order
    kinds: list


def run_pruner(pda: PrunerPda, forest: ParseForest, *, direct: bool = False,
               refine: bool = True) -> PrunedForest:
    """Prune a forest; raises :class:`EmptyAfterPrune` when no tree survives.

    ``direct=True`` applies :func:`prune_step` without the prebuilt tables.
    ``refine=False`` skips the context pass and returns the output of the
    four local clauses only.
    """
    g = pda.g
    n = len(forest.ids)
    kinds = forest.kinds
    if n == 0:
        if g.start not in g.eps:
            raise EmptyAfterPrune(0)
        return PrunedForest(forest.tokens, [], [])
    if direct:
        out = _run_direct(g, forest)
    else:
        out = _run_table(pda, forest)
    if refine:
        out = pda.refiner.refine(out, kinds)
    return PrunedForest(forest.tokens, out, list(kinds))


def _run_table(pda: PrunerPda, forest: ParseForest) -> list:
    ids, kinds = forest.ids, forest.kinds
    n = len(ids)
    states = pda.states
    empty = pda.empty
    step, step3 = pda.step, pda.step3
    cur = pda.last[ids[-1]]
    if cur == empty:
        raise EmptyAfterPrune(n - 1)
    out = [0] * n
    out[-1] = cur
    stack: list = []
    for i in range(n - 2, -1, -1):
        p = ids[i]
        if kinds[i] == CALL and kinds[i + 1] != RET:
            top = stack.pop() if stack else -1
            cur = step3.get((p, cur, top))
            if cur is None:
                # only reachable when the forest did not come from this PDA
                raise KeyError(f"pruner table has no entry at position {i}")
        else:
            cur, act = step[(p, cur)]
            if act is PUSH:
                stack.append(out[i + 1])
        if cur == empty:
            raise EmptyAfterPrune(i)
        out[i] = cur
    return [states[s] for s in out]


def _run_direct(g: Vpg, forest: ParseForest) -> list:
    return prune_verbatim(g, forest.states(), forest.kinds)


def prune_verbatim(g: Vpg, ms: list, kinds: list) -> list:
    """The four local clauses applied right to left over plain edge sets."""
    n = len(ms)
    cur = prune_last(g, ms[-1])
    if not cur:
        raise EmptyAfterPrune(n - 1)
    out = [EMPTY] * n
    out[-1] = cur
    stack: list = []
    for i in range(n - 2, -1, -1):
        top = EMPTY
        if kinds[i] == CALL and kinds[i + 1] != RET:
            top = stack.pop() if stack else EMPTY
        nxt, act = prune_step(g, ms[i], cur, top, kinds[i], kinds[i + 1])
        if act == PUSH:
            stack.append(cur)
        cur = nxt
        if not cur:
            raise EmptyAfterPrune(i)
        out[i] = cur
    return out


# -- context refinement ------------------------------------------------------

def level_structure(kinds) -> tuple:
    """Return ``(opener_of_return, closer_of_call)`` position maps.

    ``opener_of_return[j]`` is the call position popped by the return at
    ``j`` (``-1`` when the stack was empty); ``closer_of_call[k]`` is the
    return position that pops ``k`` (``-1`` if it stays open).
    """
    n = len(kinds)
    opener = [-1] * n
    closer = [-1] * n
    stack: list = []
    for i, k in enumerate(kinds):
        if k == CALL:
            stack.append(i)
        elif k == RET and stack:
            c = stack.pop()
            opener[i] = c
            closer[c] = i
    return opener, closer


def _ok_ret(g: Vpg, c, prev, e) -> bool:
    """May return edge ``e`` follow ``prev`` inside the level opened by ``c``?"""
    if isinstance(e.src[0], tuple):
        if c is None or e.src != (c.src, c.dst):
            return False
        d = prev.dst
        return d[1] and d[0] in g.eps
    if c is not None and c.dst[1]:
        return False
    return e.src == prev.dst


class Refiner:
    """Keeps exactly the edges that lie on at least one complete tree."""

    def __init__(self, g: Vpg):
        self.g = g
        self._sets: dict = {}
        self._list: list = []
        self._fw: dict = {}
        self._bw: dict = {}
        self._proj: dict = {}
        start = Edge(START, (START_NT, False), "", (g.start, False))
        self.start_r = self._id(frozenset([(None, start)]))

    def _id(self, s: frozenset) -> int:
        i = self._sets.get(s)
        if i is None:
            i = self._sets[s] = len(self._list)
            self._list.append(s)
        return i

    # forward ---------------------------------------------------------------
    def _fw_link(self, r: int, m: frozenset, tag: str):
        key = (tag, r, m)
        hit = self._fw.get(key)
        if hit is not None:
            return hit
        R = self._list[r]
        by_dst: dict = {}
        for (c, e) in R:
            by_dst.setdefault(e.dst, []).append(c)
        out = set()
        for e in m:
            for c in by_dst.get(e.src, ()):
                out.add((c, e))
        if tag == "call":
            res = (self._id(frozenset(out)), self._id(frozenset((e, e) for (_, e) in out)))
        else:
            res = self._id(frozenset(out))
        self._fw[key] = res
        return res

    def _fw_ret(self, calls: int, r: int, m: frozenset):
        key = ("ret", calls, r, m)
        hit = self._fw.get(key)
        if hit is not None:
            return hit
        g = self.g
        outer: dict = {}
        for (c2, c) in self._list[calls]:
            outer.setdefault(c, []).append(c2)
        out = set()
        for (c, prev) in self._list[r]:
            below = outer.get(c)
            if not below:
                continue
            for e in m:
                if _ok_ret(g, c, prev, e):
                    for c2 in below:
                        out.add((c2, e))
        res = self._id(frozenset(out))
        self._fw[key] = res
        return res

    # backward --------------------------------------------------------------
    def _bw_link(self, u: int, r: int):
        key = ("link", u, r)
        hit = self._bw.get(key)
        if hit is not None:
            return hit
        want = {(c, e.src) for (c, e) in self._list[u]}
        res = self._id(frozenset(x for x in self._list[r] if (x[0], x[1].dst) in want))
        self._bw[key] = res
        return res

    def _bw_call(self, u: int, r: int, allowed: int):
        key = ("call", u, r, allowed)
        hit = self._bw.get(key)
        if hit is not None:
            return hit
        opened = {e for (_, e) in self._list[u]}
        want = {(c2, c.src) for (c2, c) in self._list[allowed] if c in opened}
        res = self._id(frozenset(x for x in self._list[r] if (x[0], x[1].dst) in want))
        self._bw[key] = res
        return res

    def _bw_ret(self, u: int, r: int, calls: int):
        key = ("ret", u, r, calls)
        hit = self._bw.get(key)
        if hit is not None:
            return hit
        g = self.g
        useful: dict = {}
        for (c2, e) in self._list[u]:
            useful.setdefault(c2, []).append(e)
        keep = set()
        used_calls = set()
        for (c2, c) in self._list[calls]:
            exits = useful.get(c2)
            if not exits:
                continue
            for (cc, prev) in self._list[r]:
                if cc != c:
                    continue
                if any(_ok_ret(g, c, prev, e) for e in exits):
                    keep.add((cc, prev))
                    used_calls.add((c2, c))
        res = (self._id(frozenset(keep)), self._id(frozenset(used_calls)))
        self._bw[key] = res
        return res

    def _project(self, u: int) -> frozenset:
        p = self._proj.get(u)
        if p is None:
            p = self._proj[u] = frozenset(e for (_, e) in self._list[u])
        return p

    # driver ----------------------------------------------------------------
    def forward(self, states: list, kinds: list):
        """Per-position reachable pair-set ids and per-call pair-set ids."""
        n = len(states)
        opener, _ = level_structure(kinds)
        r = self.start_r
        R = [0] * n
        calls = {}
        for i in range(n):
            k = kinds[i]
            if k == PLAIN:
                r = self._fw_link(r, states[i], "plain")
            elif k == CALL:
                calls[i], r = self._fw_link(r, states[i], "call")
            else:
                o = opener[i]
                if o < 0:
                    r = self._fw_link(r, states[i], "plain")
                else:
                    r = self._fw_ret(calls[o], r, states[i])
            R[i] = r
        return R, calls, opener

    def refine(self, states: list, kinds: list) -> list:
        n = len(states)
        if n == 0:
            return []
        g = self.g
        R, calls, opener = self.forward(states, kinds)
        eps = g.eps
        fin = frozenset(x for x in self._list[R[-1]] if not x[1].dst[1] and x[1].dst[0] in eps)
        if not fin:
            raise EmptyAfterPrune(n - 1)
        start_r = self.start_r
        u = self._id(fin)
        out = [EMPTY] * n
        useful_calls: dict = {}
        for i in range(n - 1, -1, -1):
            out[i] = m = self._project(u)
            if not m:
                raise EmptyAfterPrune(i)
            prev_r = R[i - 1] if i > 0 else start_r
            k = kinds[i]
            if k == PLAIN or (k == RET and opener[i] < 0):
                u = self._bw_link(u, prev_r)
            elif k == CALL:
                allowed = useful_calls.pop(i, calls[i])
                u = self._bw_call(u, prev_r, allowed)
            else:
                o = opener[i]
                u, used = self._bw_ret(u, prev_r, calls[o])
                useful_calls[o] = used
        if not self._list[u]:
            raise EmptyAfterPrune(0)
        return out
