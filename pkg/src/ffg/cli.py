"""Command-line interface.

Exit status: 0 on success, 2 when the result is a certified obstruction (its
JSON is on standard output), 1 for usage, input and numerical errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fixtures as fx
from .errors import FFGError, ObstructionError
from .flows import (
    VectorField,
    certified_no_root,
    exp_flow,
    functional_root,
    functional_root_all_branches,
    iterate,
    log_transform,
)
from .linfun import eigen
from .resonance import find_resonances
from .series import default_tol
from .textio import dumps, emit_map, read_map
from .transform import GroupTag, Transformation, classify, compose, inverse

EXIT_OK, EXIT_ERROR, EXIT_OBSTRUCTION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for obstructions
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read(path: str, cls=Transformation, order: int | None = None):
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return read_map(data, cls, order)
    except FFGError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(args, u) -> int:
    _write(args, dumps(u.to_json()) if args.json else emit_map(u))
    return EXIT_OK


def _obstruction(exc: ObstructionError) -> int:
    ob = exc.obstruction
    doc = ob.to_json()
    doc["solved_max_by_degree"] = {str(d): v for d, v in ob.solved_max_by_degree().items()}
    sys.stdout.write(dumps(doc))
    return EXIT_OBSTRUCTION


# ------------------------------------------------------------------ commands


def cmd_compose(args) -> int:
    a, b = _read(args.a), _read(args.b)
    return _emit(args, compose(a, b))


def cmd_inverse(args) -> int:
    return _emit(args, inverse(_read(args.map, order=args.order), args.tol))


def cmd_sqrt(args) -> int:
    u = _read(args.map, order=args.order)
    if args.k < 2:
        raise UsageError("--k must be at least 2")
    if not args.all_branches:
        branch = None
        if args.branch:
            branch = [int(b) for b in args.branch.split(",")]
        try:
            g = functional_root(u, args.k, branch, args.tol)
        except ObstructionError as exc:
            return _obstruction(exc)
        return _emit(args, g)

    results = functional_root_all_branches(u, args.k, args.tol)
    table = []
    for r in results:
        entry = {"branch": list(r.branch)}
        if r.ok:
            entry["status"] = "root"
            entry["root"] = r.root.to_json()
            entry["nonunique_degrees"] = r.nonunique_degrees
        else:
            entry["status"] = "obstruction"
            entry["obstruction"] = r.obstruction.to_json()
            entry["solved_max_by_degree"] = {
                str(d): v for d, v in r.obstruction.solved_max_by_degree().items()
            }
        table.append(entry)
    certified = certified_no_root(results)
    doc = {
        "k": args.k,
        "order": u.order,
        "eigenvalues": [
            {"re": float(z.real), "im": float(z.imag)}
            for z in eigen(u.linear_part, tol=args.tol).values
        ],
        "certified_no_root": certified,
        "branches": table,
    }
    _write(args, dumps(doc))
    if not results:
        print("no admissible branch of the linear root", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OBSTRUCTION if certified else EXIT_OK


def cmd_log(args) -> int:
    u = _read(args.map, order=args.order)
    try:
        X = log_transform(u, args.tol)
    except ObstructionError as exc:
        return _obstruction(exc)
    if X.meta.get("nonunique_degrees"):
        degrees = ", ".join(map(str, X.meta["nonunique_degrees"]))
        print(f"note: minimal-norm choice at degrees {degrees}", file=sys.stderr)
    return _emit(args, X)


def cmd_exp(args) -> int:
    X = _read(args.field, VectorField, order=args.order)
    return _emit(args, exp_flow(X, args.t))


def cmd_iterate(args) -> int:
    u = _read(args.map, order=args.order)
    try:
        f = iterate(u, args.t, args.tol)
    except ObstructionError as exc:
        return _obstruction(exc)
    return _emit(args, f)


def cmd_resonances(args) -> int:
    u = _read(args.map)
    max_degree = args.max_degree or u.order
    lam = np.linalg.eigvals(u.linear_part)
    report = find_resonances(lam, max_degree, args.tol)
    _write(args, dumps(report.to_json()))
    return EXIT_OK


def cmd_check(args) -> int:
    u = _read(args.map)
    tags = classify(u, args.tol)
    names = sorted(t.value for t in tags)
    if args.group is None:
        member = bool(tags)
        verdict = "groups: " + (", ".join(names) if names else "none")
    else:
        want = GroupTag(args.group.upper())
        member = want in tags
        verdict = f"{'member' if member else 'not a member'} of {want.value}"
    if args.json:
        doc = {"groups": names, "member": member}
        if args.group:
            doc["group"] = args.group.upper()
        _write(args, dumps(doc))
    else:
        _write(args, verdict + "\n")
    return EXIT_OK if member else EXIT_ERROR


def cmd_gen_bl(args) -> int:
    u = fx.random_bl(args.n, args.order, args.seed, repeat=args.repeat, upper=args.upper)
    return _emit(args, u)


def cmd_gen_ss(args) -> int:
    return _emit(args, fx.random_ss(args.n, args.order, args.seed))


def cmd_fixtures(args) -> int:
    if args.check:
        stale = fx.check_fixtures(args.dir)
        for name in stale:
            print(f"stale: {name}", file=sys.stderr)
        if not stale:
            print(f"{len(fx.fixture_maps())} fixtures up to date")
        return EXIT_ERROR if stale else EXIT_OK
    for path in fx.write_fixtures(args.dir):
        print(path)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    def options(default):
        # subcommands repeat the global options; SUPPRESS keeps them from
        # overwriting values given before the subcommand
        opts = argparse.ArgumentParser(add_help=False)
        store = {} if default else {"default": argparse.SUPPRESS}
        opts.add_argument("--json", action="store_true", help="JSON output", **store)
        opts.add_argument(
            "--tol",
            type=float,
            help="zero tolerance (default: FFG_TOL or 1e-9)",
            **(store or {"default": None}),
        )
        opts.add_argument("--out", help="write the result to this file", **store)
        return opts

    common = options(False)
    p = _Parser(prog="ffg", description=__doc__.splitlines()[0], parents=[options(True)])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("compose", cmd_compose, "emit a o b")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = add("inverse", cmd_inverse, "compositional inverse")
    sp.add_argument("map")
    sp.add_argument("--order", type=int)

    sp = add("sqrt", cmd_sqrt, "functional k-th root g with g o ... o g = u")
    sp.add_argument("map")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--order", type=int)
    sp.add_argument("--branch", help="comma-separated branch index per eigenvalue")
    sp.add_argument("--all-branches", action="store_true")

    sp = add("log", cmd_log, "vector field X with exp(X) = u")
    sp.add_argument("map")
    sp.add_argument("--order", type=int)

    sp = add("exp", cmd_exp, "time-t map of a vector field")
    sp.add_argument("field")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--order", type=int)

    sp = add("iterate", cmd_iterate, "continuous iterate f^t of u")
    sp.add_argument("map")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--order", type=int)

    sp = add("resonances", cmd_resonances, "resonance report of the linear part")
    sp.add_argument("map")
    sp.add_argument("--max-degree", type=int)

    sp = add("check", cmd_check, "group membership")
    sp.add_argument("map")
    sp.add_argument("--group", choices=["gs", "ss", "bl", "bu", "GS", "SS", "BL", "BU"])

    sp = add("gen-bl", cmd_gen_bl, "seeded random element of B_l")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--repeat", action="store_true", help="plant a repeated eigenvalue")
    sp.add_argument("--upper", action="store_true", help="upper triangular (B^u)")

    sp = add("gen-ss", cmd_gen_ss, "seeded random volume-preserving map")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("fixtures", cmd_fixtures, "write or verify the fixture files")
    sp.add_argument("--dir", default="fixtures")
    sp.add_argument("--check", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = default_tol()
        if not args.tol >= 0:
            raise UsageError("--tol must be nonnegative")
        return args.func(args)
    except (UsageError, FFGError, ValueError, ArithmeticError, OSError) as exc:
        print(f"ffg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
