"""Timing runs over generated token streams."""

from __future__ import annotations

import csv
import gc
import time
from typing import Callable, Optional, Sequence, TextIO

from .dump import Built
from .edges import CALL, RET
from .extract import first_tree
from .parser import run_parser
from .pruner import run_pruner

FIELDS = ("generator", "size", "tokens", "parse_s", "prune_s", "first_tree_s",
          "parse_tps", "prune_tps", "first_tree_tps", "parse_prune_tps", "max_stack")


def max_stack_depth(kinds: Sequence[int]) -> int:
    depth = best = 0
    for k in kinds:
        if k == CALL:
            depth += 1
            best = max(best, depth)
        elif k == RET and depth:
            depth -= 1
    return best


def _rate(n: int, s: float) -> float:
    return n / s if s > 0 else float("inf")


def time_one(b: Built, tokens: Sequence[str], repeats: int = 5) -> dict:
    """Best-of-``repeats`` seconds per stage on the same tokens.

    The collector is paused while timing; the runs allocate many small
    tuples and a collection pass in the middle of one run dominates the noise.
    """
    ps, qs, fs = [], [], []
    was_on = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        for _ in range(repeats):
            ps_, qs_, fs_ = _run_once(b, tokens)
            ps.append(ps_)
            qs.append(qs_)
            fs.append(fs_)
    finally:
        if was_on:
            gc.enable()
    forest = run_parser(b.ppda, tokens)
    n = len(tokens)
    p, q, f = min(ps), min(qs), min(fs)
    return {"tokens": n, "parse_s": p, "prune_s": q, "first_tree_s": f,
            "parse_tps": _rate(n, p), "prune_tps": _rate(n, q), "first_tree_tps": _rate(n, f),
            "parse_prune_tps": _rate(n, p + q), "max_stack": max_stack_depth(forest.kinds)}


def _run_once(b: Built, tokens: Sequence[str]) -> tuple:
    t0 = time.perf_counter()
    forest = run_parser(b.ppda, tokens)
    t1 = time.perf_counter()
    pruned = run_pruner(b.prpda, forest)
    t2 = time.perf_counter()
    first_tree(b.g, pruned.states, pruned.kinds)
    t3 = time.perf_counter()
    return t1 - t0, t2 - t1, t3 - t2


def run_bench(b: Built, gen: Callable[..., list], sizes: Sequence[int], *, name: str = "",
              seed: int = 0, repeats: int = 5, warmup: Optional[int] = 2000) -> list:
    """One row per size.  A short warm-up run fills the pruner's caches first."""
    if warmup:
        time_one(b, gen(warmup) if name == "nested" else gen(warmup, seed), repeats=1)
    rows = []
    for n in sizes:
        toks = gen(n) if name == "nested" else gen(n, seed)
        row = {"generator": name, "size": n}
        row.update(time_one(b, toks, repeats))
        rows.append(row)
    return rows


def doubling_ratios(rows: list, key=lambda r: r["parse_s"] + r["prune_s"]) -> list:
    """Time ratio per doubling of the input, between consecutive rows."""
    import math
    out = []
    for a, c in zip(rows, rows[1:]):
        steps = math.log2(c["tokens"] / a["tokens"])
        out.append((key(c) / key(a)) ** (1 / steps) if steps > 0 else float("nan"))
    return out


def write_csv(fp: TextIO, rows: list) -> None:
    w = csv.DictWriter(fp, fieldnames=FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
