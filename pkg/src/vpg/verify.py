"""Exhaustive small-input cross-checks of the PDAs against the oracles.

:func:`sweep` walks every string over the grammar's terminals up to a length
bound, depth first, so the recognizer, the parser, the small-step closure
and the extracted tree set all extend incrementally from the parent prefix.
Each string is checked on its own; nothing is skipped because a prefix died.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .edges import CALL, PLAIN, RET, format_edge_compact
from .extract import count_trees, extract, extract_first, extract_step, iter_trees
from .grammar import Kind, Mode, Vpg
from .oracle import BigStep, complete, smallstep_extend
from .parser import ParseForest, build_parser_pda, final_ok, run_parser
from .pruner import EmptyAfterPrune, build_pruner_pda, prune_verbatim, run_pruner
from .recognizer import accepts, build_recognizer_pda

F = False
_FAM = {Kind.PLAIN: PLAIN, Kind.CALL: CALL, Kind.RETURN: RET}

CHECKS = (
    "acceptance",        # recognizer accepts iff big-step derives
    "trees",             # extracted trees equal big-step trees
    "count",             # count_trees equals the number of trees
    "smallstep",         # complete small-step trees equal big-step trees
    "invariant1",        # extracted prefix set equals small-step closure
    "invariant2",        # call-edge stack heads sit in the parser stack
    "invariant3",        # every tree's last edge is in the current state
    "soundness",         # pruned edges all lie on some big-step tree
    "completeness",      # every big-step edge survives pruning
    "idempotence",       # pruning a pruned forest changes nothing
    "table_direct",      # table-driven and direct pruning agree
)


@dataclass
class SweepReport:
    grammar: str
    max_len: int
    strings: int = 0
    accepted: int = 0
    trees: int = 0
    violations: dict = field(default_factory=lambda: {c: 0 for c in CHECKS})
    examples: dict = field(default_factory=dict)
    # diagnostics only: how the unrefined pruner and literal extraction fare
    literal_extract_mismatch: int = 0
    local_prune_unsound: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def fail(self, check: str, w: tuple, detail: str = ""):
        self.violations[check] += 1
        self.examples.setdefault(check, (" ".join(w), detail))

    def summary(self) -> str:
        bad = {k: v for k, v in self.violations.items() if v}
        return (f"{self.grammar}: {self.strings} strings, {self.accepted} accepted, "
                f"{self.trees} trees, {'ok' if not bad else bad}, {self.seconds:.1f}s")


def sweep(g: Vpg, max_len: int, name: str = "", alphabet: Optional[list] = None) -> SweepReport:
    t0 = time.perf_counter()
    rep = SweepReport(name or repr(g), max_len)
    sigma = sorted(alphabet if alphabet is not None else g.terminals)
    rpda = build_recognizer_pda(g)
    ppda = build_parser_pda(g)
    prpda = build_pruner_pda(ppda)
    big = BigStep(g)
    general = g.mode is Mode.GENERAL
    first = (g.start, F)

    # empty input
    rep.strings += 1
    b0 = big.trees(g.start, F, ())
    if accepts(rpda, g, rpda.start, []) != bool(b0):
        rep.fail("acceptance", ())
    rep.accepted += bool(b0)
    rep.trees += len(b0)

    # frame: (w, rec sid or None, rec stack, parser sid or None, parser stack,
    #         ids, kinds, small-step set, extracted set)
    init = ((), rpda.start, (), ppda.start, (), (), (), {((), ())}, None)
    todo = [init]
    while todo:
        w, rs, rst, ps, pst, ids, kinds, S, V = todo.pop()
        if len(w) >= max_len:
            continue
        for x in reversed(sigma):
            k = g.terminals[x].kind
            fam = _FAM[k]
            nw = w + (x,)
            # recognizer
            nrs, nrst = rs, rst
            if nrs is not None:
                if k is Kind.PLAIN:
                    nrs = rpda.plain[(rs, x)]
                elif k is Kind.CALL:
                    nrst = rst + ((rs, x),)
                    nrs = rpda.call[(rs, x)]
                elif rst:
                    nrs, _ = rpda.ret[(rs, x, rst[-1])]
                    nrst = rst[:-1]
                elif general:
                    nrs, _ = rpda.ret[(rs, x, None)]
                else:
                    nrs = None
                if nrs == rpda.dead:
                    nrs = None
            # parser
            nps, npst = ps, pst
            if nps is not None:
                if k is Kind.PLAIN:
                    nps = ppda.plain[(ps, x)]
                elif k is Kind.CALL:
                    nps = ppda.call[(ps, x)]
                    npst = pst + (nps,)
                else:
                    top = pst[-1] if pst else -1
                    nps = ppda.ret[(ps, x, top)]
                    npst = pst[:-1]
                if nps == ppda.empty:
                    nps = None
            nids = ids + (nps,) if nps is not None else ids
            nkinds = kinds + (fam,)
            # small step, restricted to trees starting at L0ᶠ
            nS: set = set()
            for v, E in S:
                nS |= smallstep_extend(g, v, E, x, first=first)
            # extraction on the unpruned prefix forest
            if nps is not None:
                m = ppda.states[nps]
                nV = extract_first(m, fam) if V is None else extract_step(g, V, m, fam)
            else:
                nV = set()
            _check(rep, g, nw, nrs, nrst, nps, npst, nids, nkinds, nS, nV,
                   rpda, ppda, prpda, big)
            todo.append((nw, nrs, nrst, nps, npst, nids, nkinds, nS, nV))
    rep.seconds = time.perf_counter() - t0
    return rep


def _check(rep, g, w, rs, rst, ps, pst, ids, kinds, S, V, rpda, ppda, prpda, big):
    rep.strings += 1
    bt = big.trees(g.start, F, w)
    acc = rs is not None and accepts(rpda, g, rs, list(rst))
    if acc != bool(bt):
        rep.fail("acceptance", w, f"recognizer={acc} oracle={bool(bt)}")
    rep.accepted += bool(bt)
    rep.trees += len(bt)

    # invariants on the prefix
    if ps is None:
        if S:
            rep.fail("invariant1", w, "parser died but small-step configurations remain")
    else:
        if set(V) != S:
            rep.fail("invariant1", w, f"{len(set(V) - S)} extra, {len(S - set(V))} missing")
        m = ppda.states[ps]
        top = ppda.states[pst[-1]] if pst else None
        for v, E in V:
            if (not E and pst) or (E and (top is None or E[0] not in top)):
                rep.fail("invariant2", w)
                break
        for v, _ in V:
            if v[-1] not in m:
                rep.fail("invariant3", w)
                break

    ss = frozenset(v for v, _ in S if complete(g, v))
    if ss != bt:
        rep.fail("smallstep", w)

    # full parse, prune, extract
    trees: frozenset = frozenset()
    pruned = None
    if ps is not None:
        forest = ParseForest(ppda, w, list(ids), list(kinds), pst)
        if final_ok(ppda, forest):
            try:
                pr = run_pruner(prpda, forest)
                pruned = pr.states
            except EmptyAfterPrune:
                pruned = None
            if pruned is not None:
                trees = frozenset(iter_trees(g, pruned, list(kinds), None))
                if count_trees(g, pruned, list(kinds)) != len(trees):
                    rep.fail("count", w)
            _diagnostics(rep, g, forest, bt)
            _table_vs_direct(rep, g, prpda, forest, w)
    if trees != bt:
        rep.fail("trees", w, f"extracted={len(trees)} oracle={len(bt)}")
    if pruned is not None:
        per_pos = [set() for _ in w]
        for v in bt:
            for i, e in enumerate(v):
                per_pos[i].add(e)
        for i, m in enumerate(pruned):
            extra = set(m) - per_pos[i]
            if extra:
                rep.fail("soundness", w, f"position {i}: " + ", ".join(map(format_edge_compact, extra)))
                break
            if per_pos[i] - set(m):
                rep.fail("completeness", w, f"position {i}")
                break
        again = prune_verbatim(g, pruned, list(kinds))
        if again != list(pruned) or prpda.refiner.refine(pruned, list(kinds)) != list(pruned):
            rep.fail("idempotence", w)
    elif bt:
        rep.fail("completeness", w, "pruning emptied the forest")


def _table_vs_direct(rep, g, prpda, forest, w):
    def run(direct):
        try:
            return run_pruner(prpda, forest, direct=direct, refine=False).states
        except EmptyAfterPrune:
            return None
    if run(True) != run(False):
        rep.fail("table_direct", w)


def _diagnostics(rep, g, forest, bt):
    lit = extract(g, forest.states(), list(forest.kinds), literal=True)
    lit_trees = frozenset(v for v, _ in lit if complete(g, v))
    if lit_trees != bt:
        rep.literal_extract_mismatch += 1
    try:
        local = prune_verbatim(g, forest.states(), list(forest.kinds))
    except EmptyAfterPrune:
        return
    edges = [set() for _ in forest.ids]
    for v in bt:
        for i, e in enumerate(v):
            edges[i].add(e)
    if any(set(m) - edges[i] for i, m in enumerate(local)):
        rep.local_prune_unsound += 1


# -- translation round trip ------------------------------------------------------

@dataclass
class RoundTripReport:
    grammar: str
    max_len: int
    strings: int = 0
    accepted: int = 0
    trees: int = 0
    language_mismatch: int = 0
    bad_trees: int = 0
    examples: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.language_mismatch and not self.bad_trees

    def summary(self) -> str:
        return (f"{self.grammar}: {self.strings} strings, {self.accepted} accepted, {self.trees} trees, "
                f"{self.language_mismatch} language mismatches, {self.bad_trees} bad trees, "
                f"{self.seconds:.1f}s")


def roundtrip(tr, max_len: int, name: str = "", alphabet: Optional[list] = None,
              tree_limit: int = 4) -> RoundTripReport:
    """Compare a translation against its source CFG on every short string.

    For each ``w`` the source must derive ``w`` exactly when the VPG
    recognizer accepts it, and the first ``tree_limit`` VPG trees must map to
    CFG trees that conform to the source and spell out ``w``.
    """
    from itertools import product

    from .actions import cfg_tree_frontier, vpg_tree_to_cfg_tree
    from .oracle import cfg_derive_enumerate, cfg_tree_conforms
    from .recognizer import run_recognizer

    t0 = time.perf_counter()
    g = tr.vpg
    rep = RoundTripReport(name or repr(tr.source), max_len)
    sigma = sorted(alphabet if alphabet is not None else tr.source.terminals)
    rpda = build_recognizer_pda(g)
    ppda = build_parser_pda(g)
    prpda = build_pruner_pda(ppda)
    for n in range(max_len + 1):
        for w in product(sigma, repeat=n):
            rep.strings += 1
            want = cfg_derive_enumerate(tr.source, w, bound=max_len)
            got = run_recognizer(rpda, g, w).accepted
            if want != got:
                rep.language_mismatch += 1
                rep.examples.append((" ".join(w), f"cfg={want} vpg={got}"))
                continue
            if not got:
                continue
            rep.accepted += 1
            pr = run_pruner(prpda, run_parser(ppda, w))
            for v in iter_trees(g, pr.states, pr.kinds, tree_limit):
                rep.trees += 1
                t = vpg_tree_to_cfg_tree(v, g, tr.actions)
                why = cfg_tree_conforms(tr.source, t)
                if why is None and [x.name for x in cfg_tree_frontier(t)] != list(w):
                    why = "frontier differs from input"
                if why is not None:
                    rep.bad_trees += 1
                    rep.examples.append((" ".join(w), why))
    rep.seconds = time.perf_counter() - t0
    return rep


# -- the standard oracle suite -----------------------------------------------------

ORACLE_SUITE = ("fig2", "g2", "appb", "pending_call", "pending_return", "appf",
                "two_calls", "mixed", "example_a")


def oracle_suite() -> list:
    """``[(name, Vpg)]`` for the bundled grammars the sweep runs on; tagged
    CFGs are translated first."""
    from . import corpus
    from .grammar import TaggedCfg
    from .translate import translate
    out = []
    for name in ORACLE_SUITE:
        g = corpus.load(name)
        if isinstance(g, TaggedCfg):
            g = translate(g).vpg
        out.append((name, g))
    return out
