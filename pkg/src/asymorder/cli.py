"""Command-line interface.

Exit codes: 0 success, 1 expectation failure, 2 input error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .asym import ORDERS, GridPolicy, IndexSet, ProcessFamily, Rule, judge_all, report_at, sweep
from .dist import load_spec
from .order import MODES, TIE_TOL
from .quad import is_divergent

EXIT_OK, EXIT_EXPECTATION, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
CSV_COLUMNS = ("t", "measure", "l1_partial", "wp_partial", "p", "precedence", "flags")


class InputError(Exception):
    pass


def _read_spec(path: str):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return load_spec(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _orders(text: str) -> tuple:
    chosen = tuple(o.strip() for o in text.split(",") if o.strip())
    bad = [o for o in chosen if o not in ORDERS]
    if bad or not chosen:
        raise InputError(f"--order must be a comma list drawn from {','.join(ORDERS)}")
    return chosen


def _rule(args) -> Rule:
    kw = {}
    if args.rule_theta_hold is not None:
        kw["theta_hold"] = args.rule_theta_hold
    if args.rule_theta_fail is not None:
        kw["theta_fail"] = args.rule_theta_fail
    try:
        return Rule(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _family(args) -> ProcessFamily:
    if args.fixture:
        if args.x or args.y:
            raise InputError("give either --fixture or --x/--y, not both")
        return _fixture(args.fixture).family
    if not (args.x and args.y):
        raise InputError("need --fixture or both --x and --y")
    fx, fy = _read_spec(args.x), _read_spec(args.y)
    return ProcessFamily(fx, fy, IndexSet("continuous", -math.inf), name=f"{args.x} vs {args.y}")


def _fixture(name: str):
    try:
        return fixtures.get(name)
    except fixtures.UnknownFixtureError:
        raise InputError(f"unknown fixture {name!r}; known: {', '.join(fixtures.names())}") from None


def _grid(args, fam: ProcessFamily) -> list:
    if args.grid is None:
        return fam.default_grid()
    try:
        grid = GridPolicy.parse(args.grid).grid()
    except ValueError as exc:
        raise InputError(f"bad --grid: {exc}") from exc
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("grid must be strictly increasing")
    for t in grid:
        if not fam.index.contains(t):
            raise InputError(f"grid point t={t} lies outside the family's index set")
    return grid


def _enc(v):
    return "divergent" if is_divergent(v) else v


def _emit(text: str, out: str | None, name: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if name is not None:
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    path.write_text(text)


def _csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        rec = r.record()
        w.writerow([rec[c] if c != "flags" else ";".join(rec["flags"]) for c in CSV_COLUMNS])
    return buf.getvalue()


def cmd_compare(args) -> int:
    fx, fy = _read_spec(args.x), _read_spec(args.y)
    for F in (fx, fy):
        F.validate(args.t)
    rep = report_at(fx, fy, args.t, p=args.p, cross_check=True)
    rec = rep.record()
    rec["intervals"] = [list(iv) for iv in rep.intervals]
    _emit(json.dumps(rec, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    fam = _family(args)
    grid = _grid(args, fam)
    orders = _orders(args.order)
    rule = _rule(args)
    reports = sweep(fam, grid, p=args.p, orders=orders, workers=args.workers)
    verdicts = judge_all(reports, orders, rule)
    payload = json.dumps([verdicts[o].to_json() for o in orders], indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(_csv(reports))
        sys.stdout.write(payload)
    else:
        _emit(_csv(reports), args.out, "sweep.csv")
        _emit(payload, args.out, "verdicts.json")
    for o in orders:
        print(f"{o}: {verdicts[o].verdict}", file=sys.stderr)
    return EXIT_OK


def cmd_fixture(args) -> int:
    fx = _fixture(args.name)
    results = fx.check(_rule(args), seed=args.seed)
    failed = [r for r in results if not r.passed]
    lines = [f"fixture {fx.name}: {fx.description}"]
    for r in results:
        e = r.expectation
        obs = r.observed
        if isinstance(obs, tuple):
            obs = f"{obs[0]:.6g} +/- {obs[1]:.2g}"
        where = "" if e.t is None else f" t={e.t:g}"
        lines.append(f"  {'PASS' if r.passed else 'FAIL'}  {e.quantity}{where}  "
                     f"expected {e.relation} {_enc(e.value)}  observed {_enc(obs)}")
    lines.append(f"{len(results) - len(failed)}/{len(results)} expectations met")
    _emit("\n".join(lines) + "\n", args.out)
    if failed:
        names = ", ".join(sorted({r.expectation.quantity for r in failed}))
        print(f"failed: {names}", file=sys.stderr)
        return EXIT_EXPECTATION
    return EXIT_OK


def cmd_export_fixture(args) -> int:
    fx = _fixture(args.name)
    fam = fx.family
    _emit(json.dumps(fam.x.to_spec(), indent=2) + "\n", args.out, "x.json")
    _emit(json.dumps(fam.y.to_spec(), indent=2) + "\n", args.out, "y.json")
    meta = {"name": fx.name, "description": fx.description, "grid": fam.default_grid(),
            "index": {"kind": fam.index.kind, "start": fam.index.start}}
    _emit(json.dumps(meta, indent=2) + "\n", args.out, "fixture.json")
    return EXIT_OK


def cmd_curves(args) -> int:
    fam = _family(args)
    t = args.t
    fam.validate(t)
    fx, fy = fam.pair(t)
    if args.mode not in MODES:
        raise InputError(f"unknown --mode {args.mode!r}")
    if args.points < 2:
        raise InputError("--points must be at least 2")
    sx, sy = MODES[args.mode]
    u = (np.arange(args.points) + 0.5) / args.points
    qx = np.asarray(getattr(fx, f"quantile_{sx}")(u, t), dtype=float)
    qy = np.asarray(getattr(fy, f"quantile_{sy}")(u, t), dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("u", "quantile_x", "quantile_y", "violation"))
    for row in zip(u, qx, qy):
        w.writerow((repr(float(row[0])), repr(float(row[1])), repr(float(row[2])),
                    int(row[1] > row[2] + TIE_TOL)))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _add_common(p, family=True):
    if family:
        p.add_argument("--x", help="distribution spec (JSON) for X")
        p.add_argument("--y", help="distribution spec (JSON) for Y")
        p.add_argument("--fixture", help="use a registered fixture's family")
    p.add_argument("--out", help="output file (or directory for multi-file commands)")


def _add_rule(p):
    p.add_argument("--rule-theta-hold", type=float, default=None)
    p.add_argument("--rule-theta-fail", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymorder",
                                     description="Asymptotic stochastic order diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="all diagnostics for one pair at a fixed t")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    _add_common(p, family=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="diagnostics over a t-grid plus verdicts")
    _add_common(p)
    p.add_argument("--grid", help='"t0:factor:count" or a comma list of t values')
    p.add_argument("--order", default=",".join(ORDERS))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--workers", type=int, default=1)
    _add_rule(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixture", help="check a registered fixture against its expectations")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=42)
    _add_common(p, family=False)
    _add_rule(p)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("export-fixture", help="write a fixture's specs to a directory")
    p.add_argument("name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_fixture)

    p = sub.add_parser("curves", help="quantile curves of a pair at a fixed t, as CSV")
    _add_common(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--mode", default="left/left")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "p", 1.0) < 1.0:
        print("error: --p must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        # ConvergenceError, EvalError and FloatingPointError all land here
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
