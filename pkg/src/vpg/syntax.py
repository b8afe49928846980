"""Reading and writing the textual grammar format.

Rules look like ``name = alt | alt ;`` (``:`` works in place of ``=``).
Lowercase identifiers and every name defined by a rule are nonterminals;
other capitalised identifiers and quoted literals are terminals.  ``<T`` marks a call occurrence and ``T>`` a return
occurrence.  Parenthesised groups accept ``?``, ``*`` and ``+``.  An
alternative may end with an action ``@{ ... }`` whose body is kept verbatim.
A name in backticks is always a nonterminal, which lets programmatic
grammars with capitalised nonterminals round-trip.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .grammar import (
    CfgRule, DuplicateRule, Empty, Group, GrammarSyntaxError, Kind, KindConflict,
    Linear, Matching, TaggedCfg, Terminal, UndeclaredSymbol, UserCode, Vpg,
    iter_nonterminals,
)


@dataclass
class Tok:
    kind: str       # name, quoted, nt, punct, action, eps, eof
    text: str
    line: int
    col: int


_PUNCT = set("=:|;()<>?*+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col0 = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = i - col0 + 1
        if ch == "\n":
            line += 1
            col0 = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _PUNCT:
            toks.append(Tok("punct", ch, line, col))
            i += 1
        elif ch == "ε":
            toks.append(Tok("eps", ch, line, col))
            i += 1
        elif ch in "'\"":
            j = i + 1
            buf = []
            while j < n and text[j] != ch:
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                    continue
                if text[j] == "\n":
                    raise GrammarSyntaxError("unterminated literal", line, col)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise GrammarSyntaxError("unterminated literal", line, col)
            if not buf:
                raise GrammarSyntaxError("empty literal", line, col)
            toks.append(Tok("quoted", "".join(buf), line, col))
            i = j + 1
        elif ch == "`":
            j = text.find("`", i + 1)
            if j < 0 or "\n" in text[i:j]:
                raise GrammarSyntaxError("unterminated backquoted name", line, col)
            toks.append(Tok("nt", text[i + 1:j], line, col))
            i = j + 1
        elif ch == "@":
            if not text.startswith("@{", i):
                raise GrammarSyntaxError("expected '{' after '@'", line, col)
            depth, j = 0, i + 1
            while j < n:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                elif text[j] == "\n":
                    line += 1
                    col0 = j + 1
                j += 1
            if j >= n:
                raise GrammarSyntaxError("unterminated action", line, col)
            toks.append(Tok("action", text[i + 2:j], line, col))
            i = j + 1
        else:
            m = _NAME.match(text, i)
            if not m:
                raise GrammarSyntaxError(f"unexpected character {ch!r}", line, col)
            toks.append(Tok("name", m.group(), line, col))
            i = m.end()
    toks.append(Tok("eof", "", line, i - col0 + 1))
    return toks


def is_terminal_name(name: str) -> bool:
    return name[:1].isupper()


class _Parser:
    def __init__(self, text: str, reserve_underscore: bool):
        self.toks = tokenize(text)
        self.pos = 0
        self.reserve = reserve_underscore
        self.kinds: dict[str, tuple] = {}
        # names defined by some rule are nonterminals whatever their case
        self.heads = {t.text for i, t in enumerate(self.toks)
                      if t.kind == "name" and (i == 0 or self.toks[i - 1].text == ";")
                      and self.toks[i + 1].kind == "punct" and self.toks[i + 1].text in "=:"}

    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, *texts: str) -> Tok:
        t = self.next()
        if t.kind != "punct" or t.text not in texts:
            want = " or ".join(repr(x) for x in texts)
            raise GrammarSyntaxError(f"expected {want}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def is_punct(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "punct" and t.text == text

    def terminal(self, tok: Tok, kind: Kind) -> Terminal:
        prev = self.kinds.get(tok.text)
        if prev is not None and prev[0] is not kind:
            raise KindConflict(
                f"{tok.line}:{tok.col}: terminal {tok.text!r} used as {kind.value}, "
                f"but as {prev[0].value} at {prev[1]}:{prev[2]}")
        if prev is None:
            self.kinds[tok.text] = (kind, tok.line, tok.col)
        return Terminal(tok.text, kind)

    def is_term_tok(self, t: Tok) -> bool:
        return t.kind == "quoted" or (t.kind == "name" and is_terminal_name(t.text)
                                      and t.text not in self.heads)

    def nonterminal(self, t: Tok) -> str:
        if self.reserve and t.text.startswith("_"):
            raise GrammarSyntaxError(f"names starting with '_' are reserved: {t.text!r}", t.line, t.col)
        return t.text

    def parse(self):
        rules = []
        while self.peek().kind != "eof":
            head_tok = self.next()
            if head_tok.kind in ("nt", "name"):
                head = self.nonterminal(head_tok)
            else:
                raise GrammarSyntaxError(f"expected a nonterminal name, found {head_tok.text!r}",
                                         head_tok.line, head_tok.col)
            self.expect("=", ":")
            alts = self.alternatives(top=True)
            self.expect(";")
            rules.append((head, head_tok, alts))
        if not rules:
            t = self.peek()
            raise GrammarSyntaxError("grammar has no rules", t.line, t.col)
        return rules

    def alternatives(self, top: bool):
        alts = [self.sequence(top)]
        while self.is_punct("|"):
            self.next()
            alts.append(self.sequence(top))
        return alts

    def sequence(self, top: bool):
        items = []
        action = None
        start = self.peek()
        while True:
            t = self.peek()
            if t.kind == "action":
                if not top:
                    raise GrammarSyntaxError("actions are only allowed at the end of a top-level alternative",
                                             t.line, t.col)
                self.next()
                action = t.text
                nt = self.peek()
                if not (nt.kind == "punct" and nt.text in "|;"):
                    raise GrammarSyntaxError("action must end the alternative", nt.line, nt.col)
                break
            if t.kind == "eps":
                self.next()
                continue
            if t.kind == "punct" and t.text in "|;)":
                break
            items.append(self.item())
        return items, action, start

    def item(self):
        t = self.next()
        if t.kind == "punct" and t.text == "<":
            tt = self.next()
            if not self.is_term_tok(tt):
                raise GrammarSyntaxError("'<' must precede a terminal", tt.line, tt.col)
            item = self.terminal(tt, Kind.CALL)
            if self.is_punct(">"):
                raise GrammarSyntaxError("a terminal cannot be both call and return", tt.line, tt.col)
            return item
        if self.is_term_tok(t):
            if self.is_punct(">"):
                self.next()
                return self.terminal(t, Kind.RETURN)
            return self.postfix(self.terminal(t, Kind.PLAIN))
        if t.kind == "nt" or t.kind == "name":
            return self.postfix(self.nonterminal(t))
        if t.kind == "punct" and t.text == "(":
            alts = self.alternatives(top=False)
            self.expect(")")
            op = None
            if self.peek().kind == "punct" and self.peek().text in "?*+":
                op = self.next().text
            return Group(tuple(tuple(a[0]) for a in alts), op)
        raise GrammarSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)

    def postfix(self, item):
        t = self.peek()
        if t.kind == "punct" and t.text in "?*+":
            self.next()
            return Group(((item,),), t.text)
        return item


def _check_heads(rules):
    seen = {}
    for head, tok, _ in rules:
        if head in seen:
            raise DuplicateRule(f"{tok.line}:{tok.col}: nonterminal {head!r} already defined at line {seen[head]}")
        seen[head] = tok.line
    return seen


def parse_tagged_cfg(text: str, *, allow_reserved: bool = False) -> TaggedCfg:
    """Parse a tagged CFG; ``_`` names are reserved for generated symbols
    unless ``allow_reserved`` is set (used when reading dumped stages)."""
    p = _Parser(text, reserve_underscore=not allow_reserved)
    rules = p.parse()
    heads = _check_heads(rules)
    out = []
    for head, tok, alts in rules:
        for items, action, start in alts:
            for n in iter_nonterminals(items):
                if n not in heads:
                    raise UndeclaredSymbol(f"{start.line}:{start.col}: nonterminal {n!r} is never defined")
            _check_brackets(items, start)
            act = UserCode(action, len(items)) if action is not None else None
            out.append(CfgRule(head, tuple(items), act, start.line))
    return TaggedCfg(out, rules[0][0])


def _check_brackets(items, start):
    depth = 0
    for it in items:
        if isinstance(it, Terminal):
            if it.kind is Kind.CALL:
                depth += 1
            elif it.kind is Kind.RETURN:
                depth -= 1
                if depth < 0:
                    raise GrammarSyntaxError("return symbol without a matching call in the same alternative",
                                             start.line, start.col)
        elif isinstance(it, Group):
            for alt in it.alternatives:
                _check_brackets(alt, start)
    if depth:
        raise GrammarSyntaxError("call symbol without a matching return in the same alternative",
                                 start.line, start.col)


def parse_vpg(text: str, mode=None) -> Vpg:
    p = _Parser(text, reserve_underscore=False)
    rules = p.parse()
    heads = _check_heads(rules)
    out = []
    for head, tok, alts in rules:
        for items, action, start in alts:
            r = _vpg_rule(head, items, start)
            for n in (getattr(r, "target", None), getattr(r, "inner", None), getattr(r, "after", None)):
                if n is not None and n not in heads:
                    raise UndeclaredSymbol(f"{start.line}:{start.col}: nonterminal {n!r} is never defined")
            out.append(r)
    return Vpg(out, rules[0][0], mode=mode)


def _vpg_rule(head, items, start):
    def bad():
        return GrammarSyntaxError(f"alternative of {head!r} is not a VPG rule shape", start.line, start.col)
    if any(isinstance(i, Group) for i in items):
        raise bad()
    if not items:
        return Empty(head)
    if len(items) == 2 and isinstance(items[0], Terminal) and isinstance(items[1], str):
        return Linear(head, items[0], items[1])
    if (len(items) == 4 and isinstance(items[0], Terminal) and items[0].kind is Kind.CALL
            and isinstance(items[1], str) and isinstance(items[2], Terminal)
            and items[2].kind is Kind.RETURN and isinstance(items[3], str)):
        return Matching(head, items[0], items[1], items[2], items[3])
    raise bad()


def parse_grammar_file(text: str, syntax: str = "auto"):
    """Parse grammar text as ``'cfg'`` (tagged CFG), ``'vpg'`` or ``'auto'``.

    Auto mode returns a Vpg when every alternative already has a VPG rule
    shape, and a TaggedCfg otherwise.
    """
    if syntax == "vpg":
        return parse_vpg(text)
    if syntax == "cfg":
        return parse_tagged_cfg(text)
    try:
        return parse_vpg(text)
    except GrammarSyntaxError:
        return parse_tagged_cfg(text)


# ---------------------------------------------------------------------------
# Formatting


def fmt_nt(name: str) -> str:
    if _NAME.fullmatch(name) and not is_terminal_name(name):
        return name
    return f"`{name}`"


def fmt_term(t: Terminal) -> str:
    if _NAME.fullmatch(t.name) and is_terminal_name(t.name):
        s = t.name
    else:
        s = "'" + t.name.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if t.kind is Kind.CALL:
        return "<" + s
    if t.kind is Kind.RETURN:
        return s + ">"
    return s


def fmt_item(item) -> str:
    if isinstance(item, Terminal):
        return fmt_term(item)
    if isinstance(item, str):
        return fmt_nt(item)
    if isinstance(item, Group):
        inner = " | ".join(" ".join(fmt_item(i) for i in alt) for alt in item.alternatives)
        return f"({inner}){item.op or ''}"
    if hasattr(item, "format"):
        return item.format()
    raise TypeError(item)


def vpg_rule_items(r) -> list:
    if isinstance(r, Linear):
        return [r.term, r.target]
    if isinstance(r, Matching):
        return [r.call, r.inner, r.ret, r.after]
    return []


def format_vpg(g: Vpg, comments: Optional[dict] = None) -> str:
    """Render ``g`` in the grammar file syntax, start rule first.

    ``comments`` maps a rule to a trailing comment (actions, provenance).
    """
    order = [g.start] + sorted(n for n in g.rules_of if n != g.start)
    lines = []
    for head in order:
        alts = g.rules_of.get(head, [])
        if not alts:
            continue
        parts = []
        for r in alts:
            parts.append(" ".join(fmt_item(i) for i in vpg_rule_items(r)) or "ε")
        lines.append(_rule_line(head, parts, [comments.get(r) if comments else None for r in alts]))
    return "\n".join(lines) + "\n"


def _rule_line(head, bodies, notes):
    h = fmt_nt(head)
    if len(bodies) == 1:
        line = f"{h} = {bodies[0]}".rstrip() + " ;"
        return line + (f"  # {notes[0]}" if notes[0] else "")
    pad = " " * len(h)
    out = []
    for k, (body, note) in enumerate(zip(bodies, notes)):
        lead = f"{h} =" if k == 0 else f"{pad} |"
        out.append(f"{lead} {body}".rstrip() + (f"  # {note}" if note else ""))
    out.append(f"{pad} ;")
    return "\n".join(out)


def format_cfg_rules(rules, start: str, action_text=None) -> str:
    """Render a list of CFG-shaped rules (head, items, action) grouped by head."""
    by_head: dict = {}
    for r in rules:
        by_head.setdefault(r.head, []).append(r)
    order = [start] + sorted(h for h in by_head if h != start)
    lines = []
    for head in order:
        rs = by_head.get(head, [])
        if not rs:
            continue
        bodies, notes = [], []
        for r in rs:
            body = " ".join(fmt_item(i) for i in r.rhs) or "ε"
            if isinstance(r.action, UserCode):
                body = (body + " @{" + r.action.text + "}").strip()
            bodies.append(body)
            notes.append(action_text(r) if action_text else None)
        lines.append(_rule_line(head, bodies, notes))
    return "\n".join(lines) + "\n"


def format_tagged_cfg(g: TaggedCfg) -> str:
    return format_cfg_rules(g.rules, g.start)


__all__ = [
    "parse_grammar_file", "parse_tagged_cfg", "parse_vpg", "format_vpg", "format_tagged_cfg",
    "format_cfg_rules", "fmt_term", "fmt_nt", "tokenize",
]
