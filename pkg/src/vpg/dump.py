"""Line-oriented text dump of a built grammar: recognizer and parser tables.

Layout, one record per line::

    vpg-pda 1
    grammar <json>
    action <rule index> <json>                   (translated grammars only)
    R <id> <json pair list>                      recognizer states
    RT <from> <json symbol> <top> -> <to> <act>  top is "-" or "<sid>:<json call>"
    P <id> <json edge list>                      parser states
    PT <from> <json symbol> <top> -> <to>        top is "-" or a call state id

Ids are the table indices, so a dump loads back into identical tables.  The
pruner tables are not stored; they are cheap to rebuild from the parser.
"""

from __future__ import annotations

import json
from typing import Optional, TextIO

from .edges import edge_from_json, edge_to_json, sorted_edges
from .grammar import (Empty, Kind, Linear, Matching, Mode, Terminal, Vpg, action_from_json,
                      action_to_json)
from .parser import ParserPda, build_parser_pda
from .pruner import PrunerPda, build_pruner_pda
from .recognizer import NOOP, POP, PUSH, RecognizerPda, build_recognizer_pda

MAGIC = "vpg-pda 1"


class DumpFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _j(x) -> str:
    return json.dumps(x, ensure_ascii=False, separators=(",", ":"))


def _term(t: Terminal) -> list:
    return [t.name, t.kind.value]


def grammar_to_json(g: Vpg) -> dict:
    rules = []
    for r in g.rules:
        if isinstance(r, Empty):
            rules.append(["eps", r.head])
        elif isinstance(r, Linear):
            rules.append(["lin", r.head, _term(r.term), r.target])
        else:
            rules.append(["match", r.head, _term(r.call), r.inner, _term(r.ret), r.after])
    return {"start": g.start, "mode": g.mode.value, "v0": sorted(g.v0),
            "nonterminals": sorted(g.nonterminals), "rules": rules}


def grammar_from_json(d: dict) -> Vpg:
    def term(x):
        return Terminal(x[0], Kind(x[1]))
    rules = []
    for r in d["rules"]:
        if r[0] == "eps":
            rules.append(Empty(r[1]))
        elif r[0] == "lin":
            rules.append(Linear(r[1], term(r[2]), r[3]))
        else:
            rules.append(Matching(r[1], term(r[2]), r[3], term(r[4]), r[5]))
    return Vpg(rules, d["start"], mode=Mode(d["mode"]), v0=d["v0"], nonterminals=d["nonterminals"])


class Built:
    """Everything a run needs: grammar, actions and the three PDAs."""

    def __init__(self, g: Vpg, rpda: RecognizerPda, ppda: ParserPda, actions: Optional[dict] = None):
        self.g = g
        self.rpda = rpda
        self.ppda = ppda
        self.actions = actions
        self._prpda: Optional[PrunerPda] = None

    @property
    def prpda(self) -> PrunerPda:
        if self._prpda is None:
            self._prpda = build_pruner_pda(self.ppda)
        return self._prpda


def build(g: Vpg, actions: Optional[dict] = None) -> Built:
    return Built(g, build_recognizer_pda(g), build_parser_pda(g), actions)


def _act_str(act) -> str:
    if isinstance(act, tuple):
        return f"{act[0]}:{act[1]}:{_j(act[2])}"
    return act


def _act_parse(s: str):
    if s in (NOOP, POP):
        return s
    tag, sid, sym = s.split(":", 2)
    if tag != PUSH:
        raise ValueError(f"bad action {s!r}")
    return (PUSH, int(sid), json.loads(sym))


def save(fp: TextIO, b: Built) -> None:
    g = b.g
    fp.write(MAGIC + "\n")
    fp.write("grammar " + _j(grammar_to_json(g)) + "\n")
    if b.actions is not None:
        for i, r in enumerate(g.rules):
            fp.write(f"action {i} {_j(action_to_json(b.actions.get(r)))}\n")
    rp = b.rpda
    for i, s in enumerate(rp.states):
        fp.write(f"R {i} {_j(sorted(s))}\n")
    for s, sym, top, t, act in rp.transitions():
        ts = "-" if top is None else f"{top[0]}:{_j(top[1])}"
        fp.write(f"RT {s} {_j(sym)} {ts} -> {t} {_act_str(act)}\n")
    pp = b.ppda
    for i, m in enumerate(pp.states):
        fp.write(f"P {i} {_j([edge_to_json(e) for e in sorted_edges(m)])}\n")
    for (s, sym), t in sorted(pp.plain.items()):
        fp.write(f"PT {s} {_j(sym)} - -> {t}\n")
    for (s, sym), t in sorted(pp.call.items()):
        fp.write(f"PT {s} {_j(sym)} - -> {t}\n")
    for (s, sym, top), t in sorted(pp.ret.items()):
        fp.write(f"PT {s} {_j(sym)} {'-' if top < 0 else top} -> {t}\n")


def dumps(b: Built) -> str:
    import io
    buf = io.StringIO()
    save(buf, b)
    return buf.getvalue()


def load(fp: TextIO) -> Built:
    g = None
    act_rows: dict = {}
    rstates: list = []
    pstates: list = []
    rplain, rcall, rret = {}, {}, {}
    pplain, pcall, pret = {}, {}, {}
    first = True
    for no, raw in enumerate(fp, 1):
        line = raw.rstrip("\n")
        if first:
            if line != MAGIC:
                raise DumpFormatError(no, "not a PDA dump")
            first = False
            continue
        if not line:
            continue
        tag, _, rest = line.partition(" ")
        try:
            if tag == "grammar":
                g = grammar_from_json(json.loads(rest))
            elif tag == "action":
                i, a = rest.split(" ", 1)
                act_rows[int(i)] = action_from_json(json.loads(a))
            elif tag == "R":
                i, s = rest.split(" ", 1)
                _expect(int(i), len(rstates), no)
                rstates.append(frozenset(tuple(p) for p in json.loads(s)))
            elif tag == "P":
                i, s = rest.split(" ", 1)
                _expect(int(i), len(pstates), no)
                pstates.append(frozenset(edge_from_json(e) for e in json.loads(s)))
            elif tag in ("RT", "PT"):
                lhs, rhs = rest.split(" -> ")
                s, sym, top = _split3(lhs)
                s, sym = int(s), json.loads(sym)
                if g is None:
                    raise DumpFormatError(no, "transition before grammar")
                kind = g.terminals[sym].kind
                if tag == "RT":
                    t, act = rhs.split(" ", 1)
                    if kind is Kind.PLAIN:
                        rplain[(s, sym)] = int(t)
                    elif kind is Kind.CALL:
                        rcall[(s, sym)] = int(t)
                    else:
                        if top == "-":
                            key = None
                        else:
                            ts, ta = top.split(":", 1)
                            key = (int(ts), json.loads(ta))
                        rret[(s, sym, key)] = (int(t), _act_parse(act))
                else:
                    t = int(rhs)
                    if kind is Kind.PLAIN:
                        pplain[(s, sym)] = t
                    elif kind is Kind.CALL:
                        pcall[(s, sym)] = t
                    else:
                        pret[(s, sym, -1 if top == "-" else int(top))] = t
            else:
                raise DumpFormatError(no, f"unknown record {tag!r}")
        except DumpFormatError:
            raise
        except (ValueError, KeyError, IndexError) as exc:
            raise DumpFormatError(no, str(exc)) from None
    if g is None:
        raise DumpFormatError(0, "no grammar record")
    actions = {r: act_rows.get(i) for i, r in enumerate(g.rules)} if act_rows else None
    rpda = RecognizerPda(g, rstates, rplain, rcall, rret)
    ppda = ParserPda(g, pstates, pplain, pcall, pret)
    return Built(g, rpda, ppda, actions)


def loads(text: str) -> Built:
    import io
    return load(io.StringIO(text))


def _expect(got: int, want: int, line: int):
    if got != want:
        raise DumpFormatError(line, f"state id {got} out of order, expected {want}")


def _split3(s: str) -> tuple:
    # the symbol is JSON and may contain spaces, so split from both ends
    a, rest = s.split(" ", 1)
    sym, top = rest.rsplit(" ", 1)
    return a, sym, top
