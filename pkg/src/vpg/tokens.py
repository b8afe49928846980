"""Token streams on disk and the optional end tag preprocessing for HTML.

A token file holds one token per line: ``NAME`` or ``NAME<TAB>lexeme``.
Inside a lexeme ``\\t``, ``\\n``, ``\\r`` and ``\\\\`` stand for tab, newline,
carriage return and backslash.  Blank lines and lines starting with ``#`` are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

_ESC = {"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}


class TokenFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MoreCloseThanOpen(ValueError):
    pass


@dataclass(frozen=True)
class TokenRecord:
    name: str
    lexeme: Optional[str] = None


def escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def unescape(s: str, line: int = 0) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\":
            nxt = s[i + 1] if i + 1 < len(s) else ""
            if nxt not in _ESC:
                raise TokenFormatError(line, f"bad escape \\{nxt}")
            out.append(_ESC[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse_tokens(lines: Iterable[str]) -> list[TokenRecord]:
    out = []
    for no, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, sep, lex = line.partition("\t")
        name = name.strip()
        if not name:
            raise TokenFormatError(no, "empty token name")
        out.append(TokenRecord(name, unescape(lex, no) if sep else None))
    return out


def read_tokens(fp: TextIO) -> list[TokenRecord]:
    return parse_tokens(fp)


def load_tokens(path: str) -> list[TokenRecord]:
    with open(path, encoding="utf-8") as fp:
        return read_tokens(fp)


def write_tokens(fp: TextIO, toks: Iterable) -> None:
    for t in toks:
        if isinstance(t, str):
            fp.write(t + "\n")
        elif t.lexeme is None:
            fp.write(t.name + "\n")
        else:
            fp.write(f"{t.name}\t{escape(t.lexeme)}\n")


def html_optional_endtags(toks: list, open_name: str = "TagOpen", close_name: str = "TagClose",
                          plain_name: str = "TagPlain") -> list:
    """Relabel open tags that are never closed.

    HTML lets some elements omit their end tag, which breaks the nesting a
    VPG needs.  With k close tags in the stream, the first k open tags stay
    open tags and every later one becomes a plain tag.  This is a heuristic:
    it is exact for documents whose unclosed elements all come after the
    last closed one, and wrong otherwise.
    """
    names = [t if isinstance(t, str) else t.name for t in toks]
    opens = names.count(open_name)
    closes = names.count(close_name)
    if closes > opens:
        raise MoreCloseThanOpen(f"{closes} {close_name} tokens but only {opens} {open_name}")
    out = []
    seen = 0
    for t, n in zip(toks, names):
        if n == open_name:
            seen += 1
            if seen > closes:
                t = plain_name if isinstance(t, str) else TokenRecord(plain_name, t.lexeme)
        out.append(t)
    return out
