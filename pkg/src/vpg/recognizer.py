"""Derivative-based recognizer PDA.

A recognizer state is a frozenset of ``(context, current)`` nonterminal
pairs.  The stack holds ``(state, call_name)`` entries, top last.  The PDA is
built eagerly by a worklist over all derivatives; it may keep states that no
input reaches.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from .grammar import Kind, Mode, Vpg

State = frozenset

NOOP, PUSH, POP = "noop", "push", "pop"


class Reject(Exception):
    def __init__(self, position: int, reason: str, detail: str = ""):
        super().__init__(f"rejected at token {position}: {reason}" + (f" ({detail})" if detail else ""))
        self.position = position
        self.reason = reason


# -- derivative functions ----------------------------------------------------

def derive_plain(g: Vpg, S: State, c: str) -> State:
    nxt = g.plain_next
    return frozenset((l1, l3) for (l1, l2) in S for l3 in nxt.get((l2, c), ()))


def derive_call(g: Vpg, S: State, a: str) -> tuple:
    out = frozenset((l3, l3) for (_, l2) in S for (l3, _b, _l4) in g.matching.get((l2, a), ()))
    return out, (S, a)


def derive_call_general(g: Vpg, S: State, a: str) -> tuple:
    out, push = derive_call(g, S, a)
    sp = frozenset((l3, l3) for (_, l2) in S for l3 in g.pending_call.get((l2, a), ()))
    return out | sp, push


def derive_ret(g: Vpg, S: State, top: tuple, b: str) -> State:
    s1, a = top
    ends = {l3 for (l3, l4) in S if l4 in g.eps}
    if not ends:
        return frozenset()
    after = g.match_after
    return frozenset((l1, l5) for (l1, l2) in s1 for l3 in ends
                     for l5 in after.get((l2, a, l3, b), ()))


def derive_ret_general(g: Vpg, S: State, top: Optional[tuple], b: str) -> tuple:
    if top is None:
        sp2 = frozenset((l3, l3) for (_, l2) in S for l3 in g.pending_ret.get((l2, b), ()))
        return sp2, NOOP
    s1, a = top
    out = derive_ret(g, S, top, b)
    # pending call in s1 answered by a pending return in S
    l5_by_ctx: dict = {}
    for (l3, l4) in S:
        for l5 in g.pending_ret.get((l4, b), ()):
            l5_by_ctx.setdefault(l3, set()).add(l5)
    sp1 = set()
    if l5_by_ctx:
        for (l1, l2) in s1:
            for l3 in g.pending_call.get((l2, a), ()):
                for l5 in l5_by_ctx.get(l3, ()):
                    sp1.add((l1, l5))
    return out | frozenset(sp1), POP


# -- PDA ---------------------------------------------------------------------

class RecognizerPda:
    """Transition tables over integer state ids.

    ``plain[(sid, c)] -> sid'``, ``call[(sid, a)] -> sid'`` (the caller
    pushes ``(sid, a)``), and ``ret[(sid, b, top)] -> (sid', action)`` where
    ``top`` is a ``(sid1, a)`` stack symbol or ``None`` for the empty stack.
    """

    def __init__(self, g: Vpg, states: list, plain: dict, call: dict, ret: dict):
        self.g = g
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.plain = plain
        self.call = call
        self.ret = ret
        self.start = 0
        self.accepting_pairs = [frozenset(p for p in s if p[1] in g.eps) for s in states]

    @property
    def dead(self) -> Optional[int]:
        return self.index.get(frozenset())

    def transitions(self):
        """Yield ``(from, symbol, top, to, action)`` in a stable order."""
        for (s, c), t in sorted(self.plain.items()):
            yield s, c, None, t, NOOP
        for (s, a), t in sorted(self.call.items()):
            yield s, a, None, t, (PUSH, s, a)
        for (s, b, top), (t, act) in sorted(self.ret.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or (-1, ""))):
            yield s, b, top, t, act


def build_recognizer_pda(g: Vpg) -> RecognizerPda:
    general = g.mode is Mode.GENERAL
    d_call = derive_call_general if general else derive_call
    plains, calls, returns = g.plains, g.calls, g.returns

    s0 = frozenset([(g.start, g.start)])
    states = [s0]
    index = {s0: 0}

    def intern(s):
        i = index.get(s)
        if i is None:
            i = index[s] = len(states)
            states.append(s)
            fresh.append(i)
        return i

    plain_t: dict = {}
    call_t: dict = {}
    ret_t: dict = {}
    fresh: list = []
    new = [0]
    done_ret = set()
    while new:
        fresh = []
        for sid in new:
            S = states[sid]
            for c in plains:
                plain_t[(sid, c)] = intern(derive_plain(g, S, c))
            for a in calls:
                call_t[(sid, a)] = intern(d_call(g, S, a)[0])
        # returns against every known state and every [S, a] stack symbol;
        # only pairs not handled in earlier rounds are computed
        known = len(states)
        for sid in range(known):
            S = states[sid]
            tops = [(t, a) for t in range(known) for a in calls]
            if general:
                tops.append(None)
            for top in tops:
                if (sid, top) in done_ret:
                    continue
                done_ret.add((sid, top))
                for b in returns:
                    if top is None:
                        res, act = derive_ret_general(g, S, None, b)
                    elif general:
                        res, act = derive_ret_general(g, S, (states[top[0]], top[1]), b)
                    else:
                        res, act = derive_ret(g, S, (states[top[0]], top[1]), b), POP
                    ret_t[(sid, b, top)] = (intern(res), act)
        new = fresh
    return RecognizerPda(g, states, plain_t, call_t, ret_t)


class RunResult(NamedTuple):
    accepted: bool
    state: State
    stack: tuple          # ((state, call_name), ...) bottom first
    reject: Optional[Reject]


def run_recognizer(pda: RecognizerPda, g: Vpg, tokens: Sequence[str], *, raise_on_reject: bool = False) -> RunResult:
    """Run over terminal names; returns whether the input is accepted."""
    general = g.mode is Mode.GENERAL
    sid = pda.start
    stack: list = []
    dead = pda.dead
    kinds = g.terminals
    err = None
    for pos, name in enumerate(tokens):
        t = kinds.get(name)
        if t is None:
            err = Reject(pos, "NoTransition", f"unknown terminal {name!r}")
            break
        k = t.kind
        if k is Kind.PLAIN:
            sid = pda.plain[(sid, name)]
        elif k is Kind.CALL:
            stack.append((sid, name))
            sid = pda.call[(sid, name)]
        else:
            if stack:
                top = stack.pop()
            elif general:
                top = None
            else:
                err = Reject(pos, "EmptyStackOnReturn")
                break
            sid, _ = pda.ret[(sid, name, top)]
        if sid == dead:
            err = Reject(pos, "NoTransition", "no derivation continues with this token")
            break
    if err is None and not accepts(pda, g, sid, stack):
        err = Reject(len(tokens), "NotAcceptingAtEof")
    res = RunResult(err is None, pda.states[sid],
                    tuple((pda.states[s], a) for s, a in stack), err)
    if err is not None and raise_on_reject:
        raise err
    return res


def accepts(pda: RecognizerPda, g: Vpg, sid: int, stack: list) -> bool:
    fin = pda.accepting_pairs[sid]
    if not fin:
        return False
    if not stack:
        return True
    if g.mode is not Mode.GENERAL:
        return False
    # the accepting pair's context must be the one opened by the pending
    # call on top of the stack
    s1, a = stack[-1]
    opened = {l for (_, l4) in pda.states[s1] for l in g.pending_call.get((l4, a), ())}
    return any(ctx in opened for (ctx, _) in fin)


def recognize(g: Vpg, tokens: Sequence[str]) -> bool:
    return run_recognizer(build_recognizer_pda(g), g, tokens).accepted


# -- rendering ---------------------------------------------------------------

def format_state(S: State) -> str:
    return "{" + ",".join(f"({a},{b})" for a, b in sorted(S)) + "}"


def format_stack(stack, g: Optional[Vpg] = None) -> str:
    """Top-first rendering such as ``[{(L,L)},⟨a]·⊥``."""
    parts = []
    for S, a in reversed(stack):
        parts.append(f"[{format_state(S)},⟨{a}]")
    parts.append("⊥")
    return "·".join(parts)
