"""Stack-machine evaluation of semantic actions over VPG parse trees.

A tree becomes a prefix program: every edge contributes the action of the
rule it applies (if that rule has one) followed by its token.  A nonterminal
that finishes through its ε-rule contributes that rule's action where the
ε-rule applies, i.e. right before a matching return and at the end of the
input.  The program is evaluated right to left; an action pops its
arguments, leftmost argument on top, and pushes one result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .edges import CALL, PLAIN, RET
from .grammar import (ActionExpr, Collect, Compose, Default, Empty, Kind, Linear, Matching,
                      UserCode, Vpg, superscript)


class ActionError(Exception):
    pass


class MissingAction(ActionError):
    pass


class StackUnderflow(ActionError):
    pass


class MultipleResults(ActionError):
    pass


class UnsupportedAction(ActionError):
    pass


@dataclass(frozen=True)
class Token:
    """A leaf value: terminal name and kind plus the lexeme, if any."""
    name: str
    kind: Kind = Kind.PLAIN
    text: Optional[str] = None

    @property
    def display(self) -> str:
        if self.text is not None and self.text != self.name:
            return self.text
        if self.kind is Kind.CALL:
            return "⟨" + self.name
        if self.kind is Kind.RETURN:
            return self.name + "⟩"
        return self.name


@dataclass(frozen=True)
class Node:
    label: str
    children: tuple = ()


@dataclass(frozen=True)
class GroupValue:
    """Intermediate value of a desugared regular operator; spliced into its parent."""
    children: tuple = ()


CfgTree = Union[Node, Token]


@dataclass(frozen=True)
class Push:
    value: Token

    def __str__(self):
        return self.value.display


@dataclass(frozen=True)
class Apply:
    action: ActionExpr

    def __str__(self):
        return str(self.action)


def format_program(p: Sequence) -> str:
    return "[" + ",".join(str(x) for x in p) + "]"


# -- tree to program -------------------------------------------------------------

def tree_to_stack_machine(v: Sequence, g: Vpg, actions: dict,
                          tokens: Optional[Sequence] = None) -> list:
    """Prefix program for tree ``v`` (a sequence of edges).

    ``actions`` maps VPG rules to action expressions or None; a rule missing
    from the table raises :class:`MissingAction`.  ``tokens`` supplies leaf
    values aligned with ``v`` (a :class:`Token` or a lexeme string); by
    default each leaf is the bare terminal.
    """
    prog: list = []
    slots: list = []    # (program index, call terminal) per open matching call

    def act_of(rule):
        try:
            return actions[rule]
        except KeyError:
            raise MissingAction(f"no action entry for rule {rule}") from None

    def leaf(i, e):
        t = g.terminals[e.sym]
        if tokens is None:
            return Token(t.name, t.kind)
        x = tokens[i]
        if isinstance(x, Token):
            return x
        return Token(t.name, t.kind, x)

    def close_eps(nt):
        a = act_of(Empty(nt[0]))
        if a is not None:
            prog.append(Apply(a))

    cur = (g.start, False)
    for i, e in enumerate(v):
        term = g.terminals[e.sym]
        if e.kind == CALL and e.dst[1]:
            slots.append((len(prog), term))
            prog.append(None)
        elif e.kind == RET and isinstance(e.src[0], tuple):
            close_eps(cur)
            (L, _), (L1, _) = e.src
            k, opener = slots.pop()
            rule = Matching(L, opener, L1, term, e.dst[0])
            a = act_of(rule)
            prog[k] = Apply(a) if a is not None else None
        else:
            a = act_of(Linear(e.src[0], term, e.dst[0]))
            if a is not None:
                prog.append(Apply(a))
        prog.append(Push(leaf(i, e)))
        cur = e.dst
    if v or g.start in g.eps:
        close_eps(cur)
    return [x for x in prog if x is not None]


# -- evaluation ----------------------------------------------------------------------

def _splice(values) -> tuple:
    out = []
    for x in values:
        if isinstance(x, GroupValue):
            out.extend(x.children)
        else:
            out.append(x)
    return tuple(out)


def apply_action(a: ActionExpr, stack: list) -> None:
    if isinstance(a, Compose):
        apply_action(a.inner, stack)
        apply_action(a.outer, stack)
        return
    if isinstance(a, UserCode):
        raise UnsupportedAction(f"user action {a} cannot be evaluated here")
    k = a.arity + (1 if isinstance(a, Collect) and a.extend else 0)
    if len(stack) < k:
        raise StackUnderflow(f"{a} needs {k} values, stack has {len(stack)}")
    args = [stack.pop() for _ in range(k)]
    if isinstance(a, Default):
        stack.append(Node(a.head, _splice(args)))
    elif isinstance(a, Collect):
        if a.extend:
            rest = args.pop()
            stack.append(GroupValue(_splice(args) + rest.children))
        else:
            stack.append(GroupValue(_splice(args)))
    else:
        raise UnsupportedAction(f"unknown action {a!r}")


def eval_stack_machine(p: Sequence) -> CfgTree:
    stack: list = []
    for item in reversed(p):
        if isinstance(item, Push):
            stack.append(item.value)
        else:
            apply_action(item.action, stack)
    if len(stack) != 1:
        raise MultipleResults(f"program left {len(stack)} values")
    return stack[0]


def vpg_tree_to_cfg_tree(v: Sequence, g: Vpg, actions: dict, tokens=None) -> CfgTree:
    return eval_stack_machine(tree_to_stack_machine(v, g, actions, tokens))


def default_actions(g: Vpg) -> dict:
    """Default action for every rule of a hand-written VPG."""
    out = {}
    for r in g.rules:
        n = 0 if isinstance(r, Empty) else (2 if isinstance(r, Linear) else 4)
        out[r] = Default(r.head, n)
    return out


# -- rendering -------------------------------------------------------------------------

def format_cfg_tree(t: CfgTree) -> str:
    """Bracketed rendering: ``(L,[(A,[c]),⟨a,E⁰,b⟩])``; childless nodes print as ``E⁰``."""
    if isinstance(t, Token):
        return t.display
    if isinstance(t, GroupValue):
        return "[" + ",".join(format_cfg_tree(c) for c in t.children) + "]"
    if not t.children:
        return t.label + superscript(0)
    return f"({t.label},[" + ",".join(format_cfg_tree(c) for c in t.children) + "])"


def cfg_tree_sexpr(t: CfgTree) -> str:
    """S-expression rendering, built iteratively so deep trees are fine."""
    out: list = []
    todo: list = [t]
    while todo:
        x = todo.pop()
        if isinstance(x, str):
            out.append(x)
        elif isinstance(x, Token):
            out.append(x.display)
        else:
            label = x.label if isinstance(x, Node) else "group"
            out.append("(" + label)
            todo.append(")")
            for c in reversed(x.children):
                todo.append(c)
                todo.append(" ")
    return "".join(out)


def cfg_tree_frontier(t: CfgTree) -> list:
    out: list = []
    todo = [t]
    while todo:
        x = todo.pop()
        if isinstance(x, Token):
            out.append(x)
        else:
            todo.extend(reversed(x.children))
    return out
