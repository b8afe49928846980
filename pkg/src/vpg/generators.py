"""Synthetic token streams for benchmarks and tests."""

from __future__ import annotations

import random

_SCALARS = ("STRING", "NUMBER", "true", "false", "null")


def json_tokens(n: int, seed: int = 0, max_depth: int = 12) -> list[str]:
    """A random JSON array of roughly ``n`` tokens (at most a few more).

    Containers are opened while the budget allows and closed when it runs
    out, so the result always parses under the bundled JSON grammar.
    """
    rng = random.Random(seed)
    out: list[str] = []
    # stack of (closer, is_object, element count)
    stack: list = []

    def value():
        if len(stack) < max_depth and len(out) + len(stack) + 4 < n and rng.random() < 0.3:
            obj = rng.random() < 0.5
            out.append("{" if obj else "[")
            stack.append(["}" if obj else "]", obj, 0])
        else:
            out.append(rng.choice(_SCALARS))

    out.append("[")
    stack.append(["]", False, 0])
    while stack:
        top = stack[-1]
        room = len(out) + len(stack) + 4 < n
        # the root array only closes when the budget is spent
        if top[2] > 0 and (not room or (len(stack) > 1 and rng.random() < 0.15)):
            out.append(top[0])
            stack.pop()
            continue
        if top[2] > 0:
            out.append(",")
        if top[1]:
            out.extend(("STRING", ":"))
        top[2] += 1
        value()
    return out


def xml_tokens(n: int, seed: int = 0, max_depth: int = 10) -> list[str]:
    """A random XML document of roughly ``n`` tokens."""
    rng = random.Random(seed)
    out = ["XMLDeclOpen", "Name", "=", "STRING", "SPECIAL_CLOSE", "SEA_WS", "OpenTag"]
    depth = 1
    while depth:
        room = len(out) + 2 * depth < n
        r = rng.random()
        if not room or (depth > 1 and r < 0.1):
            out.append("CloseTag")
            depth -= 1
            if depth:
                out.append(rng.choice(("TEXT", "SEA_WS")))
        elif r < 0.3 and depth < max_depth:
            out.append("OpenTag")
            depth += 1
        else:
            out.append(rng.choice(("SingleTag", "EntityRef", "CharRef", "CDATA", "PI", "COMMENT")))
            out.append(rng.choice(("TEXT", "SEA_WS")))
    return out


def nested_tokens(depth: int) -> list[str]:
    """``a^depth c b^depth`` for the bundled nested grammar."""
    return ["a"] * depth + ["c"] + ["b"] * depth


GENERATORS = {"json": json_tokens, "xml": xml_tokens}
