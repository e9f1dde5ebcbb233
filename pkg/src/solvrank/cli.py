"""Command line entry point: ``solvrank <command> ...``.

Exit codes: 0 success, 1 verification mismatch, 2 bad input, 3 unsupported
structure, 4 ordinal cap exceeded, 5 IVP step failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .catalog import catalog, tower_family_upto
from .encode import EnumeratorError, InjectivityError, decimal_text, load_enumerator, mu_partial
from .func import (
    BaseP,
    DomainError,
    SinSqExample,
    TreeSumCantor,
    TreeSumWestrick,
    UnsupportedStructure,
    Zero,
    eval as eval_value,
    eval_deriv,
    func_from_json,
)
from .ivp import FORMAT_VERSION, StepFailure, construct_enclosure, containment_check, example1_rhs, \
    example1_solution, validate_tuples
from .kw import KWGridConfig, kw_estimate, stages_csv
from .ordinal import OrdinalError, parse_ordinal, render_ordinal
from .removed import CapExceeded, removed_sequence, solvable_rank, stages_to_json
from .rigor import RInterval
from .tree import TreeError, limsup_rank, parse_tree, random_schema, render_tree

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_CAP, EXIT_STEP = 0, 1, 2, 3, 4, 5


class InputError(ValueError):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational: {text!r}") from exc


_SHORT = {"zero": Zero, "p": BaseP, "sinsq": SinSqExample}


def load_func(spec: str):
    """A JSON file, inline JSON, or shorthand: zero, p, sinsq, cantor:TREE, westrick:TREE."""
    if spec in _SHORT:
        return _SHORT[spec]()
    if spec.startswith("cantor:"):
        return TreeSumCantor(parse_tree(spec[7:]))
    if spec.startswith("westrick:"):
        return TreeSumWestrick(parse_tree(spec[9:]))
    if spec.lstrip().startswith("{"):
        text = spec
    else:
        path = Path(spec)
        if not path.is_file():
            raise InputError(f"no such function file: {spec}")
        text = path.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    return func_from_json(obj)


def _write(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# commands

def cmd_rank_tree(args) -> int:
    print(render_ordinal(limsup_rank(parse_tree(args.schema))))
    return EXIT_OK


def cmd_rank_solvable(args) -> int:
    f = load_func(args.func)
    rank = solvable_rank(f)
    print(render_ordinal(rank))
    if args.stages:
        stages = removed_sequence(f)
        _write(args.stages, json.dumps(stages_to_json(f, stages), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _free_family(max_rank, count: int, seed: int):
    rng = random.Random(seed)
    out, tries = [], 0
    while len(out) < count and tries < 200 * count:
        tries += 1
        t = random_schema(rng)
        if limsup_rank(t) <= max_rank:
            out.append(t)
    return out


def cmd_verify(args) -> int:
    max_rank = parse_ordinal(args.max_rank)
    if args.family == "tower":
        trees = tower_family_upto(max_rank, args.count, args.seed)
    else:
        trees = _free_family(max_rank, args.count, args.seed)
    trees = list(dict.fromkeys(trees))  # generators may repeat small trees
    for k, t in enumerate(trees):
        expected = limsup_rank(t) + 1
        if args.inject_mismatch and k == 0:
            expected = expected + 1
        got = solvable_rank(TreeSumCantor(t))
        if got != expected:
            print(f"MISMATCH {render_tree(t)}: limsup+1 = {render_ordinal(expected)}, "
                  f"solvable rank = {render_ordinal(got)}")
            return EXIT_MISMATCH
    print(f"all {len(trees)} entries pass ({args.family} family, max rank "
          f"{render_ordinal(max_rank)}, seed {args.seed})")
    return EXIT_OK


def cmd_solve_ivp(args) -> int:
    if args.system != "example1":
        raise InputError(f"unknown system {args.system!r}; only example1 is built in")
    h = _rational(args.h)
    if h <= 0:
        raise InputError("--h must be positive")
    t0, t1 = _rational(args.t0), _rational(args.t1)
    if t1 < t0:
        raise InputError("need t0 <= t1")
    x0, z0 = example1_solution(t0)
    rhs = example1_rhs()
    enc = construct_enclosure(rhs, (RInterval.point(x0), z0), (t0, t1), h, _rational(args.inflation))
    _write(args.out, enc.covers_csv())
    if args.tuples:
        _write(args.tuples, json.dumps(enc.to_json(), indent=1) + "\n")
    report = validate_tuples(rhs, (x0, z0), enc.tuples) if enc.tuples else None
    contained, where = containment_check(enc)
    width = enc.max_width()
    print(f"steps: {len(enc.tuples)}")
    print(f"max cover width: {float(width):.6g}")
    print(f"final width: {float(enc.final_width()):.6g}")
    bound = _rational(args.width_bound)
    print(f"width bound {args.width_bound}: {'met' if width <= bound else 'exceeded'}")
    print(f"validation: {'pass' if report is None or report.ok else report.first_failure}")
    print(f"contained: {'yes' if contained else f'no (first miss at t = {where})'}")
    ok = contained and (report is None or report.ok)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_kw(args) -> int:
    f = load_func(args.func)
    cfg = KWGridConfig()
    if args.config:
        try:
            cfg = KWGridConfig.from_json(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"bad config: {exc}") from exc
    est = kw_estimate(f, cfg, n_jobs=args.jobs)
    _write(args.out, stages_csv(est))
    print(est.lower_bound)
    return EXIT_OK


def cmd_eval(args) -> int:
    f = load_func(args.func)
    x, eps = _rational(args.x), _rational(args.eps)
    if eps <= 0:
        raise InputError("--eps must be positive")
    iv = (eval_deriv if args.deriv else eval_value)(f, x, eps)
    print(f"[{iv.lo}, {iv.hi}]")
    print(f"[{float(iv.lo):.17g}, {float(iv.hi):.17g}]")
    return EXIT_OK


def cmd_mu(args) -> int:
    if args.n < 0:
        raise InputError("--n must be non-negative")
    q = mu_partial(load_enumerator(args.enumerator), args.n)
    print(q)
    print(decimal_text(q))
    return EXIT_OK


def cmd_catalog(args) -> int:
    print(json.dumps({"format_version": FORMAT_VERSION, "entries": [e.to_json() for e in catalog()]},
                     indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="solvrank", description="Solvable and limsup ranks, enclosures, estimators.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rank-tree", help="limsup rank of a tree schema")
    p.add_argument("schema")
    p.set_defaults(run=cmd_rank_tree)

    p = sub.add_parser("rank-solvable", help="solvable rank of a function")
    p.add_argument("func", help="JSON file, inline JSON, or zero|p|sinsq|cantor:TREE|westrick:TREE")
    p.add_argument("--stages", help="write the stage dump JSON here ('-' for stdout)")
    p.set_defaults(run=cmd_rank_solvable)

    p = sub.add_parser("verify-correspondence", help="check solvable rank = limsup rank + 1")
    p.add_argument("--max-rank", default="3")
    p.add_argument("--family", choices=("tower", "free"), default="tower")
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-mismatch", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("solve-ivp", help="validated enclosure for a built-in IVP")
    p.add_argument("system")
    p.add_argument("--h", default="1/1024")
    p.add_argument("--inflation", default="11/10")
    p.add_argument("--width-bound", default="0.05")
    p.add_argument("--t0", default="-2")
    p.add_argument("--t1", default="2")
    p.add_argument("--out", help="covers CSV path ('-' for stdout)")
    p.add_argument("--tuples", help="tuple chain JSON path")
    p.set_defaults(run=cmd_solve_ivp)

    p = sub.add_parser("kw-estimate", help="grid lower bound for the Kechris-Woodin rank")
    p.add_argument("func")
    p.add_argument("--config")
    p.add_argument("--out", help="stage CSV path ('-' for stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(run=cmd_kw)

    p = sub.add_parser("eval", help="rigorous enclosure of y(x) or y'(x)")
    p.add_argument("func")
    p.add_argument("--x", required=True)
    p.add_argument("--eps", default="1/1048576")
    p.add_argument("--deriv", action="store_true")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("mu", help="partial sum of 2^-h(i)")
    p.add_argument("--enumerator", default="identity-successor")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(run=cmd_mu)

    p = sub.add_parser("catalog", help="print the built-in catalog")
    p.set_defaults(run=cmd_catalog)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UnsupportedStructure as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except StepFailure as exc:
        print(f"step failure: {exc}", file=sys.stderr)
        return EXIT_STEP
    except (InputError, TreeError, OrdinalError, DomainError, InjectivityError, EnumeratorError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
