"""Bundled grammars."""

import re
from importlib import resources

NAMES = ("fig2", "g2", "appb", "pending_call", "pending_return", "two_calls", "mixed",
         "example_a", "nested", "appf", "json", "xml", "html")


def path(name: str):
    """Filesystem path of a bundled grammar (``name`` with or without suffix)."""
    root = resources.files(__name__)
    for cand in (name, name + ".vpg", name + ".cfg"):
        p = root / cand
        if p.is_file():
            return p
    raise FileNotFoundError(f"no bundled grammar {name!r}")


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def golden(name: str) -> dict:
    """Sections of ``<name>.golden``: ``{section: [lines]}``."""
    out: dict = {}
    cur = None
    for line in (resources.files(__name__) / f"{name}.golden").read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if re.fullmatch(r"\[[a-z]+\]", line):
            cur = out.setdefault(line[1:-1], [])
        elif cur is not None:
            cur.append(line)
    return out


def load(name: str):
    from ..syntax import parse_grammar_file
    p = path(name)
    return parse_grammar_file(p.read_text(encoding="utf-8"), "cfg" if p.name.endswith(".cfg") else "vpg")
