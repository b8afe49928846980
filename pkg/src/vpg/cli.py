"""Command line interface: ``vpg validate|translate|build|recognize|parse|bench``.

Exit status is 0 when the input is accepted (or the command succeeded), 1
when it is rejected or a pipeline stage fails, and 2 for usage and grammar
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import corpus, dump
from .actions import ActionError, cfg_tree_sexpr, format_cfg_tree, default_actions, vpg_tree_to_cfg_tree
from .extract import count_trees, format_tree_trace, iter_trees, tree_sexpr
from .grammar import GrammarError, Kind, Mode, TaggedCfg, Vpg, action_from_json, check_vpg_wellformed
from .parser import ParseFailure, format_forest, run_parser
from .pruner import EmptyAfterPrune, run_pruner
from .recognizer import accepts, format_stack, format_state
from .syntax import parse_grammar_file
from .tokens import MoreCloseThanOpen, TokenFormatError, html_optional_endtags, load_tokens
from .translate import (Fresh, TranslationError, ValidationError, desugar_regex_ops, to_simple_form,
                        translate, validate)

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- loading ----------------------------------------------------------------------

def resolve(path: str) -> Path:
    """A file on disk, else a bundled grammar of that name."""
    p = Path(path)
    if p.exists():
        return p
    name = path[len("corpus:"):] if path.startswith("corpus:") else path
    try:
        return Path(str(corpus.path(name)))
    except FileNotFoundError:
        raise UsageError(f"no such file or bundled grammar: {path}") from None


def read_grammar(path: Path):
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise GrammarError(f"{path}: empty grammar")
    syntax = {".cfg": "cfg", ".tcfg": "cfg", ".vpg": "vpg"}.get(path.suffix, "auto")
    return parse_grammar_file(text, syntax)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".actions.json")


def read_sidecar(path: Path, g: Vpg) -> Optional[dict]:
    sc = sidecar_path(path)
    if not sc.exists():
        return None
    rows = json.loads(sc.read_text(encoding="utf-8"))
    by_text = {r["rule"]: action_from_json(r["action"]) for r in rows}
    return {r: by_text.get(str(r)) for r in g.rules}


def load_built(path_arg: str, mode: Optional[str] = None) -> dump.Built:
    """Grammar (VPG or tagged CFG) or a PDA dump, ready to run."""
    path = resolve(path_arg)
    with open(path, encoding="utf-8") as fp:
        head = fp.readline().rstrip("\n")
    if head == dump.MAGIC:
        with open(path, encoding="utf-8") as fp:
            b = dump.load(fp)
        if mode and _mode(mode) is not b.g.mode:
            raise UsageError(f"dump was built in {b.g.mode.value} mode")
        return b
    g = read_grammar(path)
    if isinstance(g, TaggedCfg):
        tr = translate(g)
        g, actions = tr.vpg, tr.actions
    else:
        actions = read_sidecar(path, g)
    if mode:
        g = Vpg(g.rules, g.start, mode=_mode(mode))
        if actions is not None:
            actions = {r: actions.get(r) for r in g.rules}
    check_vpg_wellformed(g)
    return dump.build(g, actions)


def _mode(s: str) -> Mode:
    return Mode.WELL_MATCHED if s == "wm" else Mode.GENERAL


def read_token_names(path: str, html: bool) -> tuple:
    toks = load_tokens(path)
    if html:
        toks = html_optional_endtags(toks)
    return [t.name for t in toks], [t.lexeme for t in toks]


# -- commands ----------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        g = read_grammar(resolve(args.grammar))
        if isinstance(g, Vpg):
            check_vpg_wellformed(g)
            print(f"ok: VPG with {len(g.rules)} rules ({g.mode.value})")
            return EXIT_OK
        fresh = Fresh(g.nonterminals)
        simple = to_simple_form(desugar_regex_ops(g, fresh), fresh)
        validate(simple)
    except ValidationError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        print("cycle: " + " -> ".join(e.cycle))
        return EXIT_REJECT
    except (GrammarError, UsageError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_REJECT
    print(f"ok: {len(simple)} rules in simple form")
    return EXIT_OK


def _action_rows(actions: dict) -> list:
    from .grammar import action_to_json
    return [{"id": i, "rule": str(r), "action": action_to_json(a), "text": None if a is None else str(a)}
            for i, (r, a) in enumerate(actions.items())]


def cmd_translate(args) -> int:
    src = resolve(args.grammar)
    g = read_grammar(src)
    out = Path(args.output) if args.output else None
    if isinstance(g, Vpg):
        check_vpg_wellformed(g)
        text = src.read_text(encoding="utf-8")
        rows = None
        stages = {"vpg.vpg": text}
    else:
        tr = translate(g)
        text = tr.vpg_text()
        rows = _action_rows(tr.actions)
        stages = {"desugared.cfg": _cfg_text(tr.desugared), "simple.cfg": tr.simple_text(),
                  "linear.cfg": tr.linear_text(), "vpg.vpg": text}
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        if rows is not None:
            sidecar_path(out).write_text(json.dumps(rows, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    if args.dump_stages:
        d = Path(args.dump_stages)
        d.mkdir(parents=True, exist_ok=True)
        for name, body in stages.items():
            (d / name).write_text(body, encoding="utf-8")
        if rows is not None:
            (d / "actions.json").write_text(json.dumps(rows, ensure_ascii=False, indent=1) + "\n",
                                            encoding="utf-8")
    return EXIT_OK


def _cfg_text(g: TaggedCfg) -> str:
    from .syntax import format_tagged_cfg
    return format_tagged_cfg(g)


def cmd_build(args) -> int:
    b = load_built(args.grammar, args.mode)
    text = dump.dumps(b)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"{len(b.rpda.states)} recognizer states, {len(b.ppda.states)} parser states -> {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_recognize(args) -> int:
    b = load_built(args.grammar, args.mode)
    names, _ = read_token_names(args.tokens, args.html_optional_endtags)
    g, pda = b.g, b.rpda
    general = g.mode is Mode.GENERAL
    sid, stack = pda.start, []
    dead = pda.dead
    for pos, x in enumerate(names):
        t = g.terminals.get(x)
        if t is None:
            print(f"reject at token {pos}: unknown terminal {x!r}")
            return EXIT_REJECT
        if t.kind is Kind.PLAIN:
            sid = pda.plain[(sid, x)]
        elif t.kind is Kind.CALL:
            stack.append((sid, x))
            sid = pda.call[(sid, x)]
        elif stack:
            sid, _ = pda.ret[(sid, x, stack.pop())]
        elif general:
            sid, _ = pda.ret[(sid, x, None)]
        else:
            print(f"reject at token {pos}: return {x} on an empty stack")
            return EXIT_REJECT
        if args.debug:
            shown = [(pda.states[s], a) for s, a in stack]
            print(f"{pos} {t.display}: {format_state(pda.states[sid])} {format_stack(shown)}")
        if sid == dead:
            print(f"reject at token {pos}: no derivation continues with {t.display}")
            return EXIT_REJECT
    if accepts(pda, g, sid, stack):
        print("accept")
        return EXIT_OK
    print(f"reject at token {len(names)}: input ended in a non-accepting configuration")
    return EXIT_REJECT


def cmd_parse(args) -> int:
    b = load_built(args.grammar, args.mode)
    names, lexemes = read_token_names(args.tokens, args.html_optional_endtags)
    g = b.g
    try:
        forest = run_parser(b.ppda, names)
        if g.mode is not Mode.GENERAL and forest.stack:
            print(f"reject at token {len(names)}: unclosed call")
            return EXIT_REJECT
        pruned = run_pruner(b.prpda, forest)
    except ParseFailure as e:
        print(f"reject at token {e.position}: {e.reason}")
        return EXIT_REJECT
    except EmptyAfterPrune as e:
        print(f"reject: no complete parse tree (position {e.position})")
        return EXIT_REJECT
    states, kinds = pruned.states, pruned.kinds
    if args.forest:
        print(format_forest(states))
    if args.count:
        print(count_trees(g, states, kinds))
    want = args.all_trees if args.all_trees is not None else (1 if args.first_tree or not (args.forest or args.count) else 0)
    if want:
        actions = b.actions if b.actions is not None else default_actions(g)
        for v in iter_trees(g, states, kinds, want):
            if args.cfg_tree:
                try:
                    t = vpg_tree_to_cfg_tree(v, g, actions, lexemes)
                    print(cfg_tree_sexpr(t) if args.format == "sexpr" else format_cfg_tree(t))
                except ActionError as e:
                    print(f"{type(e).__name__}: {e}", file=sys.stderr)
                    return EXIT_REJECT
            elif args.format == "sexpr":
                print(tree_sexpr(v))
            else:
                print(format_tree_trace(v))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import doubling_ratios, run_bench, write_csv
    from .generators import json_tokens, nested_tokens, xml_tokens
    gens = {"json": json_tokens, "xml": xml_tokens, "nested": nested_tokens}
    b = load_built(args.grammar or args.gen)
    sizes = [int(float(s)) for s in args.sizes.split(",")]
    rows = run_bench(b, gens[args.gen], sizes, name=args.gen, seed=args.seed, repeats=args.repeats)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fp:
            write_csv(fp, rows)
    else:
        write_csv(sys.stdout, rows)
    ratios = doubling_ratios(rows)
    if ratios:
        print("parse+prune time ratio per doubling: " + ", ".join(f"{r:.2f}" for r in ratios),
              file=sys.stderr)
    if args.plot:
        from .plotting import plot_bench
        plot_bench(rows, args.plot, title=f"{args.gen} tokens")
    return EXIT_OK


# -- entry point --------------------------------------------------------------------

def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vpg", description="Parser generator for visibly pushdown grammars.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a tagged CFG can be translated")
    p.add_argument("grammar")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("translate", help="translate a tagged CFG into a VPG")
    p.add_argument("grammar")
    p.add_argument("-o", "--output")
    p.add_argument("--dump-stages", metavar="DIR")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("build", help="build the PDAs and write a dump")
    p.add_argument("grammar")
    p.add_argument("-o", "--output")
    p.add_argument("--mode", choices=("wm", "general"))
    p.set_defaults(func=cmd_build)

    for name, fn, hlp in (("recognize", cmd_recognize, "accept or reject a token file"),
                          ("parse", cmd_parse, "parse a token file and print trees")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("grammar", help="grammar file, PDA dump or bundled grammar name")
        p.add_argument("tokens")
        p.add_argument("--mode", choices=("wm", "general"))
        p.add_argument("--html-optional-endtags", action="store_true",
                       help="turn surplus TagOpen tokens into TagPlain")
        p.set_defaults(func=fn)
        if name == "recognize":
            p.add_argument("--debug", action="store_true", help="print state and stack after each token")
        else:
            p.add_argument("--forest", action="store_true", help="print the pruned forest")
            p.add_argument("--first-tree", action="store_true")
            p.add_argument("--all-trees", type=int, metavar="N")
            p.add_argument("--count", action="store_true", help="print the number of trees")
            p.add_argument("--cfg-tree", action="store_true", help="print trees of the source grammar")
            p.add_argument("--format", choices=("trace", "sexpr"), default="trace")

    p = sub.add_parser("bench", help="time parser, pruner and first-tree extraction")
    p.add_argument("grammar", nargs="?", help="defaults to the bundled grammar of the generator")
    p.add_argument("--gen", choices=("json", "xml", "nested"), default="json")
    p.add_argument("--sizes", default="100000,200000,400000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--csv")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, TokenFormatError, MoreCloseThanOpen, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TranslationError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_REJECT
    except GrammarError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
