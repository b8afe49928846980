"""Tagged parse-tree edges.

A tagged nonterminal is a ``(name, tag)`` tuple; ``tag`` is True when only
well-matched rules may produce call or return symbols below it.  Edges are
plain tuples so they hash quickly and sort deterministically.
"""

from __future__ import annotations

from typing import NamedTuple

PLAIN, CALL, RET, START = 0, 1, 2, 3

FAMILY_NAMES = {PLAIN: "plain", CALL: "call", RET: "return", START: "start"}

# sentinel nonterminal for the helper start state; not a valid grammar name
START_NT = "\x00start"


class Edge(NamedTuple):
    kind: int
    src: tuple     # (name, tag), or ((L, u), (L1, True)) for a matching return
    sym: str       # terminal name ('' for the helper start edge)
    dst: tuple     # (name, tag)

    @property
    def matching_ret(self) -> bool:
        return self.kind == RET and isinstance(self.src[0], tuple)

    @property
    def matching_call(self) -> bool:
        return self.kind == CALL and self.dst[1]

    def __str__(self):
        return format_edge(self)


def plain_edge(L, u, c, L1) -> Edge:
    return Edge(PLAIN, (L, u), c, (L1, u))


def call_edge(L, u, a, L1, u1) -> Edge:
    return Edge(CALL, (L, u), a, (L1, u1))


def ret_edge(src, b, dst) -> Edge:
    return Edge(RET, src, b, dst)


def tag_str(u: bool) -> str:
    return "t" if u else "f"


def tnt_str(x) -> str:
    return f"({x[0]},{tag_str(x[1])})"


def sym_str(kind: int, sym: str) -> str:
    if kind == CALL:
        return "⟨" + sym
    if kind == RET:
        return sym + "⟩"
    return sym


def format_edge(e: Edge) -> str:
    if e.kind == RET and isinstance(e.src[0], tuple):
        src = f"({tnt_str(e.src[0])},{tnt_str(e.src[1])})"
    else:
        src = tnt_str(e.src)
    return f"{src} --{sym_str(e.kind, e.sym)}--> {tnt_str(e.dst)}"


def format_edge_compact(e: Edge) -> str:
    """Paper-style triple, tags as superscript letters: ``(Lᶠ,⟨a,Aᵗ)``."""
    def t(x):
        return x[0] + ("ᵗ" if x[1] else "ᶠ")
    if e.kind == RET and isinstance(e.src[0], tuple):
        src = f"({t(e.src[0])},{t(e.src[1])})"
    else:
        src = t(e.src)
    return f"({src},{sym_str(e.kind, e.sym)},{t(e.dst)})"


def edge_to_json(e: Edge) -> list:
    src = [list(e.src[0]), list(e.src[1])] if e.kind == RET and isinstance(e.src[0], tuple) else list(e.src)
    return [e.kind, src, e.sym, list(e.dst)]


def edge_from_json(d) -> Edge:
    kind, src, sym, dst = d
    if kind == RET and isinstance(src[0], list):
        src = (tuple(src[0]), tuple(src[1]))
    else:
        src = tuple(src)
    return Edge(kind, src, sym, tuple(dst))


def edge_key(e: Edge):
    """Canonical sort key; matching and pending return edges have differently shaped sources."""
    if e.kind == RET and isinstance(e.src[0], tuple):
        return (e.kind, 1, e.src[0][0], e.src[0][1], e.src[1][0], e.sym, e.dst)
    return (e.kind, 0, e.src[0], e.src[1], "", e.sym, e.dst)


def sorted_edges(m) -> list:
    return sorted(m, key=edge_key)


def connects(v1, v2) -> bool:
    """``v1 ⋄ v2``: the last edge of v1 hands over to the first edge of v2."""
    a, b = v1[-1], v2[0]
    if b.src == a.dst:
        return True
    return b.kind == RET and isinstance(b.src[0], tuple) and b.src == (a.src, a.dst)


def first_nt(v):
    return v[0].src if v else None


def last_nt(v):
    return v[-1].dst if v else None
