"""Parse-tree extraction from a (pruned) forest.

:func:`extract` is the set-based fold: seed with the first state, then extend
every partial tree by each connected edge of the next state.  It
materialises all trees, so it is meant for small inputs and tests.

:func:`count_trees` and :func:`iter_trees` work per nesting level instead.
Inside a level a path only talks to the outside through the call edge that
opened it, so the number of complete trees factors into per-level path
counts.  Enumeration walks the forest backwards and only takes steps whose
forward count is positive, so it never hits a dead end and the first tree
costs one linear pass.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .edges import CALL, PLAIN, RET, START, START_NT, Edge, connects, edge_key, format_edge_compact
from .grammar import Vpg
from .pruner import _ok_ret, level_structure

Tree = tuple   # of Edge


class NoValidTree(Exception):
    pass


# -- set-based fold ----------------------------------------------------------

def extract_first(m1, kind: int) -> set:
    if kind == CALL:
        return {((e,), (e,)) for e in m1}
    return {((e,), ()) for e in m1 if not e.dst[1]}


def extract_step_literal(g: Vpg, V: set, m, kind: int) -> set:
    """One fold step with the connection test taken literally.

    A matching return may attach right after its own call edge here without
    the inner nonterminal being nullable, so on an unpruned forest this can
    produce trees no derivation yields.  Kept for comparison only.
    """
    out = set()
    if kind == PLAIN:
        for v, E in V:
            for e in m:
                if connects(v, (e,)):
                    out.add((v + (e,), E))
    elif kind == CALL:
        for v, E in V:
            for e in m:
                if connects(v, (e,)):
                    out.add((v + (e,), (e,) + E))
    else:
        eps = g.eps
        for v, E in V:
            rest = E[1:]
            last = v[-1].dst
            for e in m:
                if connects(v, (e,)):
                    out.add((v + (e,), rest))
                if E and last[1] and last[0] in eps and connects((E[0],), (e,)):
                    out.add((v + (e,), rest))
    return out


def extract_step(g: Vpg, V: set, m, kind: int) -> set:
    """Extend parse-tree set ``V`` by state ``m``; stacks are tuples, top first.

    Return edges use the exact attachment rule: a matching return needs the
    open call on top of ``E`` and a nullable ``L3ᵗ`` before it, a pending
    return needs an empty stack or a pending call on top.
    """
    if kind != RET:
        return extract_step_literal(g, V, m, kind)
    out = set()
    for v, E in V:
        c = E[0] if E else None
        for e in m:
            if _ok_ret(g, c, v[-1], e):
                out.add((v + (e,), E[1:]))
    return out


def extract(g: Vpg, states: list, kinds: list, *, literal: bool = False) -> set:
    """All ``(tree, call-edge stack)`` pairs the fold produces."""
    if not states:
        return set()
    step = extract_step_literal if literal else extract_step
    V = extract_first(states[0], kinds[0])
    for m, k in zip(states[1:], kinds[1:]):
        V = step(g, V, m, k)
    return V


def complete_trees(g: Vpg, V) -> set:
    """Trees from ``V`` ending at ``L1ᶠ`` with ``L1 -> ε``."""
    eps = g.eps
    return {v for v, _ in V if v and not v[-1].dst[1] and v[-1].dst[0] in eps}


# -- per-level counting ------------------------------------------------------

class _Counts:
    """Forward path counts.

    ``inner[i]`` maps ``(opener, edge)`` to the number of paths from the
    opener's call edge (or the start, for ``None``) to ``edge`` at position
    ``i`` inside one level.  ``calls[k]`` maps ``(outer opener, call edge)``
    to the number of paths reaching the call edge at ``k``.
    """

    def __init__(self, g: Vpg, states: list, kinds: list):
        self.g = g
        self.states = states
        self.kinds = kinds
        self.opener, self.closer = level_structure(kinds)
        self.start = Edge(START, (START_NT, False), "", (g.start, False))
        n = len(states)
        inner: list = [None] * n
        calls: dict = {}
        prev = {(None, self.start): 1}
        for i in range(n):
            k = kinds[i]
            m = states[i]
            by_dst: dict = {}
            for (c, e), w in prev.items():
                by_dst.setdefault(e.dst, []).append((c, w))
            cur: dict = {}
            if k == PLAIN or (k == RET and self.opener[i] < 0):
                for e in m:
                    for c, w in by_dst.get(e.src, ()):
                        cur[(c, e)] = cur.get((c, e), 0) + w
            elif k == CALL:
                cs: dict = {}
                for e in m:
                    for c, w in by_dst.get(e.src, ()):
                        cs[(c, e)] = cs.get((c, e), 0) + w
                calls[i] = cs
                for (_, e) in cs:
                    cur[(e, e)] = 1
            else:
                outer: dict = {}
                for (c2, c), w in calls[self.opener[i]].items():
                    outer.setdefault(c, []).append((c2, w))
                for (c, p), w in prev.items():
                    below = outer.get(c)
                    if not below:
                        continue
                    for e in m:
                        if _ok_ret(g, c, p, e):
                            for c2, w2 in below:
                                cur[(c2, e)] = cur.get((c2, e), 0) + w * w2
            inner[i] = cur
            prev = cur
        self.inner = inner
        self.calls = calls

    def is_end(self, e) -> bool:
        return not e.dst[1] and e.dst[0] in self.g.eps

    def open_chain(self) -> list:
        return [k for k in range(len(self.states)) if self.kinds[k] == CALL and self.closer[k] < 0]

    def total(self) -> int:
        n = len(self.states)
        if n == 0:
            return 1 if self.g.start in self.g.eps else 0
        # weight per innermost opener, then unwind the open levels
        w: dict = {}
        for (c, e), x in self.inner[-1].items():
            if self.is_end(e):
                w[c] = w.get(c, 0) + x
        for k in reversed(self.open_chain()):
            nw: dict = {}
            for (c2, c), x in self.calls[k].items():
                if c in w:
                    nw[c2] = nw.get(c2, 0) + x * w[c]
            w = nw
        return w.get(None, 0)


def count_trees(g: Vpg, states: list, kinds: list) -> int:
    """Number of complete trees in the forest."""
    return _Counts(g, states, kinds).total()


def iter_trees(g: Vpg, states: list, kinds: list, limit: Optional[int] = 1) -> Iterator[Tree]:
    """Yield complete trees depth-first in canonical edge order, at most ``limit``."""
    n = len(states)
    if n == 0:
        if g.start in g.eps and (limit is None or limit > 0):
            yield ()
        return
    cnt = _Counts(g, states, kinds)
    inner, calls, opener, closer = cnt.inner, cnt.calls, cnt.opener, cnt.closer
    # at EOF the innermost opener is fixed by the input; pick any last edge
    finals = sorted(((c, e) for (c, e), x in inner[-1].items() if x and cnt.is_end(e)),
                    key=lambda ce: edge_key(ce[1]))

    def preds(i, c, e, outers):
        """Backward options at position i for state (c, e); returns
        ``(prev_c, prev_e, new_outers)`` triples for position i-1."""
        k = kinds[i]
        prev = inner[i - 1] if i > 0 else {(None, cnt.start): 1}
        res = []
        if k == PLAIN or (k == RET and opener[i] < 0):
            for (pc, pe), x in prev.items():
                if x and pc == c and pe.dst == e.src:
                    res.append((pc, pe, outers))
        elif k == CALL:
            # c == e here; the outer opener is fixed by the return, or free
            if closer[i] >= 0:
                c2_req, rest = outers
                cands = [c2_req]
            else:
                rest = outers
                cands = sorted({c2 for (c2, cc) in calls[i] if cc == e},
                               key=lambda x: (x is not None, edge_key(x) if x else ()))
            for c2 in cands:
                if not calls[i].get((c2, e)):
                    continue
                for (pc, pe), x in prev.items():
                    if x and pc == c2 and pe.dst == e.src:
                        res.append((pc, pe, rest))
        else:
            o = opener[i]
            for (c2, cc), w2 in calls[o].items():
                if not w2 or c2 != c:
                    continue
                for (pc, pe), x in prev.items():
                    if x and pc == cc and _ok_ret(g, cc, pe, e):
                        res.append((pc, pe, (c, outers)))
        res.sort(key=lambda t: (edge_key(t[1]) if t[1].kind != START else (), edge_key(t[0]) if t[0] else ()))
        return res

    produced = 0
    # explicit DFS stack of (position, option list, index); the edge chosen
    # at each position lives in ``chosen`` so backtracking just overwrites it
    chosen: list = [None] * n
    frames = [(n - 1, [(c, e, None) for c, e in finals], 0)]
    while frames:
        i, opts, j = frames.pop()
        if j >= len(opts):
            continue
        frames.append((i, opts, j + 1))
        c, e, outers = opts[j]
        if e.kind == START:
            yield tuple(chosen)
            produced += 1
            if limit is not None and produced >= limit:
                return
            continue
        chosen[i] = e
        frames.append((i - 1, preds(i, c, e, outers), 0))


def first_tree(g: Vpg, states: list, kinds: list) -> Optional[Tree]:
    for t in iter_trees(g, states, kinds, 1):
        return t
    return None


def format_tree_trace(v: Tree) -> str:
    return "[" + ", ".join(format_edge_compact(e) for e in v) + "]"


def tree_sexpr(v: Tree) -> str:
    """Nested S-expression: every rule application becomes ``(L sym child)``.

    A matching rule prints as ``(L ⟨a (inner ...) b⟩ (after ...))`` and a
    nonterminal finished by its ε-rule prints as ``(E)``.
    """
    if not v:
        return "()"
    out: list = []
    opens = [0]
    expect = v[0].src
    for e in v:
        if e.kind == RET and isinstance(e.src[0], tuple):
            out.append(f"({expect[0]})")
            out.append(")" * opens.pop())
            out.append(f" {e.sym}⟩ ")
        elif e.kind == CALL and e.dst[1]:
            out.append(f"({e.src[0]} ⟨{e.sym} ")
            opens[-1] += 1
            opens.append(0)
        else:
            sym = "⟨" + e.sym if e.kind == CALL else (e.sym + "⟩" if e.kind == RET else e.sym)
            out.append(f"({e.src[0]} {sym} ")
            opens[-1] += 1
        expect = e.dst
    out.append(f"({expect[0]})")
    out.append(")" * sum(opens))
    return "".join(out)
