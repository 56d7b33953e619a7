"""Command-line entry point.

Exit codes: 0 success (or the property holds up to the bound), 1 a
counterexample was found (printed first, in tree syntax), 2 usage or input
errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .atm import ATM, ATMError, is_normalized, normalize, parse_atm, search_accepting_tree
from .automata import AutomatonError, parse_nta
from .compilers import CompileError, compile_nta, parse_cq, translate_cq
from .datalog import DatalogError, parse_program, render_program
from .encoding import EncodingError, cell_alphabet, encode
from .engine import EngineError, eval_boolean, eval_unary
from .oracles import check_containment_bounded, check_emptiness_bounded, enumerate_trees
from .reductions import ReductionError, gen_containment_pair, gen_emptiness_query, read_alphabet, write_instance
from .trees import Alphabet, RankedAlphabet, SCHEMAS, TreeError, get_schema, parse_tree, render_tree

INPUT_ERRORS = (
    ATMError,
    AutomatonError,
    CompileError,
    DatalogError,
    EncodingError,
    EngineError,
    ReductionError,
    TreeError,
    OSError,
    ValueError,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _alphabet(text: str):
    """A comma-separated symbol list, or a path to an alphabet file."""
    if os.path.isfile(text):
        alpha = read_alphabet(_read(text))
        return (alpha.alphabet, alpha) if isinstance(alpha, RankedAlphabet) else (alpha, None)
    return Alphabet.of(s for s in text.split(",") if s), None


def _machine(args) -> ATM:
    atm = parse_atm(_read(args.atm))
    if not args.raw and not is_normalized(atm):
        atm = normalize(atm)
    return atm


# -- subcommands ------------------------------------------------------------------------


def cmd_eval(args) -> int:
    q = parse_program(_read(args.program))
    tree = parse_tree(_read(args.tree))
    schema = get_schema(args.schema)
    if args.boolean:
        print("yes" if eval_boolean(q, tree, schema, args.mode) else "no")
    else:
        print(" ".join(map(str, sorted(eval_unary(q, tree, schema, args.mode)))))
    return 0


def cmd_compile_nta(args) -> int:
    _write(args.output, render_program(compile_nta(parse_nta(_read(args.nta)))))
    return 0


def cmd_translate_cq(args) -> int:
    _write(args.output, render_program(translate_cq(parse_cq(_read(args.cq)), args.root_var)))
    return 0


def cmd_gen_emptiness(args) -> int:
    for path in write_instance(gen_emptiness_query(_machine(args), args.address_bits), args.output):
        print(path)
    return 0


def cmd_gen_containment(args) -> int:
    for path in write_instance(gen_containment_pair(_machine(args), args.address_bits), args.output):
        print(path)
    return 0


def cmd_encode_run(args) -> int:
    atm = _machine(args)
    ct = search_accepting_tree(atm, args.depth, args.address_bits)
    if ct is None:
        print("none")
        print(f"no accepting computation tree of depth <= {args.depth}", file=sys.stderr)
        return 1
    tree = encode(ct, args.address_bits, cell_alphabet(atm))
    _write(args.output, render_tree(tree) + "\n")
    return 0


def _report(verdict) -> int:
    if verdict.witness is not None:
        print(render_tree(verdict.witness))
        print(f"counterexample after {verdict.checked} trees (bound {verdict.bound})")
        return 1
    print(str(verdict))
    return 0


def cmd_check_containment(args) -> int:
    alphabet, ranked = _alphabet(args.alphabet)
    v = check_containment_bounded(
        parse_program(_read(args.q1)),
        parse_program(_read(args.q2)),
        alphabet,
        get_schema(args.schema),
        args.mode,
        args.max_nodes,
        ranked,
        args.workers,
    )
    return _report(v)


def cmd_check_emptiness(args) -> int:
    alphabet, ranked = _alphabet(args.alphabet)
    v = check_emptiness_bounded(
        parse_program(_read(args.program)),
        alphabet,
        get_schema(args.schema),
        args.mode,
        args.max_nodes,
        ranked,
        args.workers,
    )
    return _report(v)


def cmd_enum_trees(args) -> int:
    alphabet, ranked = _alphabet(args.alphabet)
    for tree in enumerate_trees(alphabet, args.max_nodes, args.mode, ranked):
        print(render_tree(tree))
    return 0


# -- parser -----------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdltree", description="Monadic datalog on trees: evaluation, compilers, reductions, oracles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    schemas = sorted(SCHEMAS)
    modes = ("ordered", "unordered")

    s = sub.add_parser("eval", help="evaluate a program on a tree")
    s.add_argument("--program", required=True)
    s.add_argument("--tree", required=True)
    s.add_argument("--schema", required=True, choices=schemas)
    s.add_argument("--mode", default="ordered", choices=modes)
    s.add_argument("--boolean", action="store_true", help="print yes/no for the root instead of all selected nodes")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("compile-nta", help="compile an unranked tree automaton to datalog")
    s.add_argument("--nta", required=True)
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(fn=cmd_compile_nta)

    s = sub.add_parser("translate-cq", help="turn a Boolean conjunctive query into a monadic program")
    s.add_argument("--cq", required=True)
    s.add_argument("--root-var")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(fn=cmd_translate_cq)

    for name, fn in (("gen-emptiness", cmd_gen_emptiness), ("gen-containment", cmd_gen_containment)):
        s = sub.add_parser(name, help="write a reduction instance for an ATM")
        s.add_argument("--atm", required=True)
        s.add_argument("--address-bits", required=True, type=int)
        s.add_argument("--raw", action="store_true", help="use the machine as given, without normalizing")
        s.add_argument("-o", "--output", required=True)
        s.set_defaults(fn=fn)

    s = sub.add_parser("encode-run", help="encode an accepting computation tree of an ATM")
    s.add_argument("--atm", required=True)
    s.add_argument("--address-bits", required=True, type=int)
    s.add_argument("--depth", required=True, type=int)
    s.add_argument("--raw", action="store_true")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(fn=cmd_encode_run)

    def oracle_flags(s):
        s.add_argument("--alphabet", required=True, help="comma-separated symbols or an alphabet file")
        s.add_argument("--schema", required=True, choices=schemas)
        s.add_argument("--mode", default="ordered", choices=modes)
        s.add_argument("--max-nodes", required=True, type=_positive)
        s.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("check-containment", help="search small trees for a containment counterexample")
    s.add_argument("--q1", required=True)
    s.add_argument("--q2", required=True)
    oracle_flags(s)
    s.set_defaults(fn=cmd_check_containment)

    s = sub.add_parser("check-emptiness", help="search small trees for one the query accepts")
    s.add_argument("--program", required=True)
    oracle_flags(s)
    s.set_defaults(fn=cmd_check_emptiness)

    s = sub.add_parser("enum-trees", help="list every tree up to a size")
    s.add_argument("--alphabet", required=True)
    s.add_argument("--mode", default="ordered", choices=modes)
    s.add_argument("--max-nodes", required=True, type=_positive)
    s.set_defaults(fn=cmd_enum_trees)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.fn(args)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
