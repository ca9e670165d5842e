"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or capacity error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import CapacityError, DomainError, MartingaleError, StructuralError
from .formats import csv_text, fmt, load_process
from .generators import DEFAULT_SEED, random_terminal, rng_for
from .integral import mrt_roundtrip, walk_moment_closed_form, walk_moments
from .integral import RandomWalk
from .martingale import DiscreteMartingale, close_martingale, quadratic_variation
from .sde import BUILTINS, exact_mean, weak_expectation
from .space import DyadicSpace, depth_cap, expectation
from .verify import DEFAULT_TOLERANCES, GRAM_DEPTH_LIMIT, gram_matrix, run_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_SDE_DEPTHS = "6,8,10,12,14"


class UsageError(Exception):
    pass


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _assignments(items, what: str) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"{what} must look like NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"{what} {name!r} needs a real value, got {value!r}") from None
    return out


def _tolerances(args) -> dict:
    raw = _assignments(args.tol, "--tol")
    tols = {}
    for name, value in raw.items():
        if name == "all":
            tols.update({k: value for k in DEFAULT_TOLERANCES})
        elif name in DEFAULT_TOLERANCES:
            tols[name] = value
        else:
            raise UsageError(
                f"unknown tolerance {name!r}; known: all, {', '.join(DEFAULT_TOLERANCES)}"
            )
    return tols


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _table(args, command: str, columns, rows, extra=()) -> None:
    meta = [f"command={command}", f"seed={args.seed}", *extra]
    if args.format == "json":
        doc = {"command": command, "seed": args.seed, "columns": list(columns),
               "rows": [list(r) for r in rows]}
        for item in extra:
            k, _, v = item.partition("=")
            doc[k] = v
        _emit(args, json.dumps(doc, sort_keys=True) + "\n")
    else:
        _emit(args, csv_text(columns, rows, [" ".join(meta)]))


def cmd_walsh_table(args) -> int:
    depth = args.depth if args.depth is not None else 4
    if depth > GRAM_DEPTH_LIMIT:
        raise CapacityError(
            f"walsh-table writes a full 2^n x 2^n matrix; depth {depth} exceeds "
            f"the table limit {GRAM_DEPTH_LIMIT}"
        )
    space = DyadicSpace(depth)
    G = gram_matrix(space)
    masks = list(range(space.size))
    rows = [[m, *(float(v) for v in G[m])] for m in masks]
    _table(args, "walsh-table", ["mask", *map(str, masks)], rows, [f"depth={depth}"])
    identity = all(G[i, j] == (1.0 if i == j else 0.0) for i in masks for j in masks)
    return EXIT_OK if identity else EXIT_FAIL


def cmd_mrt(args) -> int:
    tol = _tolerances(args).get("mrt", DEFAULT_TOLERANCES["mrt"])
    rows, failures = [], []
    if args.input:
        try:
            Y = DiscreteMartingale.from_process(load_process(args.input))
            err = mrt_roundtrip(Y, tol).max_error
        except MartingaleError as exc:
            print(f"input is not a martingale: {exc}", file=sys.stderr)
            err = math.inf
        ok = err <= tol
        rows.append([0, "", float(err), str(ok).lower()])
        if not ok:
            failures.append("input")
        extra = [f"input={Path(args.input).name}", f"tol={fmt(tol)}"]
    else:
        depth = args.depth if args.depth is not None else 12
        space = DyadicSpace(depth)
        for t in range(args.trials):
            Y = _closed(space, args.seed, t)
            err = mrt_roundtrip(Y, tol).max_error
            ok = err <= tol
            rows.append([t, f"{args.seed}:{t}", float(err), str(ok).lower()])
            if not ok:
                failures.append(f"{args.seed}:{t}")
        extra = [f"depth={depth}", f"trials={args.trials}", f"tol={fmt(tol)}"]
    _table(args, "mrt", ["trial", "seed", "max_error", "pass"], rows, extra)
    if failures:
        print(f"roundtrip failed for seed(s): {', '.join(failures)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _closed(space, seed, trial):
    return close_martingale(random_terminal(space, rng_for(seed, trial)))


def cmd_bm_stats(args) -> int:
    depths = args.depths or ([args.depth] if args.depth is not None else list(range(1, 13)))
    tol = _tolerances(args).get("moments", DEFAULT_TOLERANCES["moments"])
    rows, ok = [], True
    for n in depths:
        space = DyadicSpace(n)
        for k, value in enumerate(walk_moments(space), start=1):
            ref = walk_moment_closed_form(n, k)
            err = abs(value - ref)
            ok &= err <= tol
            rows.append([n, k, float(value), float(ref), float(err)])
        qv = quadratic_variation(RandomWalk(space), full_range=args.full_range_qv)
        mean_qv = expectation(qv)
        ref = 1.0 if args.full_range_qv else (n - 1) / n
        err = abs(mean_qv - ref)
        ok &= err <= tol
        rows.append([n, "qv", float(mean_qv), float(ref), float(err)])
    _table(args, "bm-stats", ["depth", "k", "moment", "closed_form", "abs_error"], rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sde(args) -> int:
    factory = BUILTINS[args.problem]
    params = _assignments(args.param, "--param")
    kwargs = dict(params)
    if args.problem == "poly":
        kwargs["drift_coeffs"] = args.drift_coeffs
        kwargs["diffusion_coeffs"] = args.diffusion_coeffs
    try:
        base = factory(**kwargs)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {args.problem!r}: {exc}") from None
    depths = args.depths or _int_list(DEFAULT_SDE_DEPTHS)
    rows = []
    for n in depths:
        p = base.with_depth(n)
        estimate = weak_expectation(p, lambda x: x)
        reference = exact_mean(p) if p.affine_drift is not None else math.nan
        rows.append([n, float(estimate), float(reference), float(abs(estimate - reference))])
    extra = [f"problem={args.problem}"] + [f"{k}={fmt(v)}" for k, v in sorted(params.items())]
    _table(args, "sde", ["depth", "estimate", "reference", "error"], rows, extra)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    depth = args.depth if args.depth is not None else 12
    DyadicSpace(depth)
    results = run_all(depth, args.seed, args.trials, _tolerances(args))
    summary = [r.as_dict() for r in results]
    if args.format == "csv":
        rows = [[r.suite, r.checks, float(r.max_violation), str(r.passed).lower()]
                for r in results]
        _table(args, "verify-all", ["suite", "checks", "max_violation", "pass"], rows,
               [f"depth={depth}", f"trials={args.trials}"])
    else:
        text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
        _emit(args, text)
        if args.out:
            sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None,
                        help=f"depth n (cap {depth_cap()}, env DYMART_DEPTH_CAP)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=None,
                        help="number of seeded trials (mrt 100, verify-all 20)")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="tolerance override; NAME may be 'all'")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None,
                        help="output format (verify-all json, others csv)")
    common.add_argument("--full-range-qv", action="store_true",
                        help="include the last increment in quadratic variation")

    parser = argparse.ArgumentParser(prog="dymart", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("walsh-table", parents=[common], help="Walsh Gram matrix")
    p.set_defaults(func=cmd_walsh_table)

    p = sub.add_parser("mrt", parents=[common], help="representation roundtrip trials")
    p.add_argument("--input", default=None, help="check a stored process (.csv or binary)")
    p.set_defaults(func=cmd_mrt)

    p = sub.add_parser("bm-stats", parents=[common], help="moments of the scaled walk")
    p.add_argument("--depths", type=_int_list, default=None)
    p.set_defaults(func=cmd_bm_stats)

    p = sub.add_parser("sde", parents=[common], help="Euler weak-expectation sweep")
    p.add_argument("problem", choices=sorted(BUILTINS))
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--depths", type=_int_list, default=None)
    p.add_argument("--drift-coeffs", type=_float_list, default=[0.0])
    p.add_argument("--diffusion-coeffs", type=_float_list, default=[0.0])
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("verify-all", parents=[common], help="run every invariant suite")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    verify = args.command == "verify-all"
    if args.format is None:
        args.format = "json" if verify else "csv"
    if args.trials is None:
        args.trials = 20 if verify else 100
    if args.trials < 0:
        print("dymart: --trials must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, DomainError, StructuralError) as exc:
        kind = "capacity error" if isinstance(exc, CapacityError) else "error"
        print(f"dymart: {kind}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
