"""Command-line front end.

Exit codes: 0 pass/accept, 1 mathematical failure or rejection, 2 usage or
input error. Every command writes a JSON envelope {"manifest", "report"}
to --out (or stdout with --json) and a one-line summary otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .convolution import QuadratureError, compare_densities, default_grid, parse_statement
from .distributions import parse_distribution
from .identities import (
    LEMMAS,
    DerivativeCase,
    DomainError,
    am_derivative_closed_form,
    am_derivative_coefficient,
    maclaurin_residual,
    sweep,
)
from .mctests import InvalidDataError, McConfig, equality_mc_test, gof_from_data, gof_replicates, read_data
from .reporting import canonical_json, grid_csv, make_manifest, now_iso, svg_overlay

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _worker_cap() -> Optional[int]:
    env = os.environ.get("CHAREX_THREADS")
    if not env:
        return None
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"CHAREX_THREADS must be an integer, got {env!r}") from None


def read_config(path: str) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` comments, keys spelled like the long options."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _add_common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--out", help="write the JSON report here (default: stdout with --json)")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--config", help="flat key=value file; command-line flags win")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="exact sweep of the four Stirling lemmas")
    _add_common(p)
    p.add_argument("--lemmas", default=",".join(LEMMAS))
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--rmax", type=int, default=6)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("derivatives", help="derivative coefficients of F^m f and the series reconstruction")
    _add_common(p)
    p.add_argument("--mmax", type=int, default=6)
    p.add_argument("--rmax", type=int, default=12)
    p.add_argument("--maclaurin", action="store_true", help="also check the truncated series")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--terms", type=int, default=30)
    p.add_argument("--tol", type=float, default=1e-9, help="series residual threshold")

    p = sub.add_parser("density", help="compare left- and right-hand densities on a grid")
    _add_common(p)
    p.add_argument("--statement", required=True, help="e.g. T1:k=2,n=2")
    p.add_argument("--dist", default="exp:rate=1")
    p.add_argument("--expect", choices=("equal", "differ"), default="equal")
    p.add_argument("--tol", type=float, default=1e-6, help="threshold for --expect equal")
    p.add_argument("--threshold", type=float, default=None, help="explicit threshold (default 0.1 for differ)")
    p.add_argument("--quad-tol", type=float, default=1e-9)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--xmin", type=float, default=0.01)
    p.add_argument("--xmax", type=float, default=None)
    p.add_argument("--plot", help="write an SVG overlay")
    p.add_argument("--csv", help="write the grid values as CSV")

    for name, helptext in (("mc", "Monte-Carlo two-sample test of an identity"),
                           ("gof", "exponentiality test on a data file")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "mc":
            p.add_argument("--statement", required=True)
            p.add_argument("--dist", default="exp:rate=1")
            p.add_argument("--n", type=int, default=5000, help="replicates per side")
        else:
            p.add_argument("--data", required=True)
            p.add_argument("--statement", default="T3:k=2,n=2")
            p.add_argument("--min-blocks", type=int, default=50)
        p.add_argument("--statistic", choices=("ks", "cvm", "KS", "CvM"), default="ks")
        p.add_argument("--mode", choices=("asymptotic", "permutation"), default=None)
        p.add_argument("--permutations", type=int, default=999)
        p.add_argument("--alpha", type=float, default=0.05)
    return parser


def _prescan(argv: Sequence[str]):
    command = next((a for a in argv if not a.startswith("-")), None)
    path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
    return command, path


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    command, path = _prescan(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if path and command in subparsers:
        subparser = subparsers[command]
        actions = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, raw in read_config(path).items():
            if key not in actions or key in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {command}")
            action = actions[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
                continue
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except (TypeError, ValueError):
                raise UsageError(f"config value for {key!r} is invalid: {raw!r}") from None
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"config value for {key!r} must be one of {list(action.choices)}")
        subparser.set_defaults(**defaults)
        for action in subparser._actions:
            if action.required and action.dest in defaults:
                action.required = False
    return parser.parse_args(argv)


def _config_echo(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("json", "out")}


def _run_identities(args) -> tuple:
    lemmas = [s.strip().upper() for s in args.lemmas.split(",") if s.strip()]
    workers = args.workers
    cap = _worker_cap()
    if workers is None:
        workers = cap or 1
    elif cap is not None:
        workers = min(workers, cap)
    report = sweep(lemmas, args.kmax, args.nmax, args.rmax, workers=workers)
    summary = f"{report.total_cases} cases, {len(report.failures)} failures"
    return report.to_dict(), (EXIT_OK if report.ok else EXIT_FAIL), summary


def _run_derivatives(args) -> tuple:
    if args.mmax < 0 or args.rmax < 0:
        raise UsageError("--mmax and --rmax must be non-negative")
    mismatches = []
    total = 0
    for m in range(args.mmax + 1):
        for r in range(args.rmax + 1):
            case = DerivativeCase(m, r)
            got = am_derivative_coefficient(case)
            want = am_derivative_closed_form(case)
            total += 1
            if got != want:
                mismatches.append({"m": m, "r": r, "expansion": str(got), "closed_form": str(want)})
    payload = {
        "grid": {"m_max": args.mmax, "r_max": args.rmax},
        "total_cases": total,
        "failures": mismatches,
        "ok": not mismatches,
    }
    ok = not mismatches
    summary = f"{total} coefficient cases, {len(mismatches)} failures"
    if args.maclaurin:
        residual = maclaurin_residual(args.rate, args.x, args.terms)
        passed = residual < args.tol
        payload["maclaurin"] = {
            "rate": args.rate,
            "x": args.x,
            "terms": args.terms,
            "residual": residual,
            "threshold": args.tol,
            "ok": passed,
        }
        ok = ok and passed
        summary += f"; series residual {residual:.3e} ({'ok' if passed else 'above threshold'})"
    payload["ok"] = ok
    return payload, (EXIT_OK if ok else EXIT_FAIL), summary


def _run_density(args) -> tuple:
    statement = parse_statement(args.statement)
    dist = parse_distribution(args.dist)
    if args.points < 0:
        raise UsageError("--points must be non-negative")
    grid = default_grid(dist, args.points, args.xmin, args.xmax)
    if args.points and grid[0] <= 0:
        raise UsageError("--xmin must be positive")
    comparison = compare_densities(statement, dist, grid, args.quad_tol)
    if args.threshold is not None:
        threshold = args.threshold
    else:
        threshold = args.tol if args.expect == "equal" else 0.1
    dev = comparison.sup_deviation
    passed = dev < threshold if args.expect == "equal" else dev >= threshold
    payload = comparison.to_dict()
    payload.update({"expect": args.expect, "threshold": threshold, "ok": passed})
    if args.plot:
        Path(args.plot).write_text(
            svg_overlay(comparison.grid, comparison.lhs_values, comparison.rhs_values,
                        title=f"{statement} under {dist.to_spec()}"),
            encoding="utf-8",
        )
    if args.csv:
        Path(args.csv).write_text(
            grid_csv(comparison.grid, comparison.lhs_values, comparison.rhs_values), encoding="utf-8"
        )
    summary = f"{statement} {dist.to_spec()}: sup deviation {dev:.3e} (expect {args.expect}, threshold {threshold:g})"
    return payload, (EXIT_OK if passed else EXIT_FAIL), summary


def _mc_config(args, n_samples: int) -> McConfig:
    return McConfig(
        n_samples=n_samples,
        seed=args.seed,
        statistic=args.statistic,
        p_value_mode=args.mode,
        permutations=args.permutations,
        alpha=args.alpha,
    )


def _run_mc(args) -> tuple:
    statement = parse_statement(args.statement)
    dist = parse_distribution(args.dist)
    report = equality_mc_test(statement, dist, _mc_config(args, args.n))
    summary = f"{statement} {dist.to_spec()}: p = {report.p_value:.4g}, {report.decision}"
    return report.to_dict(), (EXIT_OK if report.decision == "accept" else EXIT_FAIL), summary


def _run_gof(args) -> tuple:
    statement = parse_statement(args.statement)
    try:
        data = read_data(args.data)
    except OSError as exc:
        raise UsageError(f"cannot read data file: {exc}") from None
    replicates = max(2, gof_replicates(len(data), statement))
    report = gof_from_data(data, statement, _mc_config(args, replicates), min_blocks=args.min_blocks)
    summary = f"{statement} on {len(data)} values: p = {report.p_value:.4g}, {report.decision}"
    return report.to_dict(), (EXIT_OK if report.decision == "accept" else EXIT_FAIL), summary


_RUNNERS = {
    "identities": _run_identities,
    "derivatives": _run_derivatives,
    "density": _run_density,
    "mc": _run_mc,
    "gof": _run_gof,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"charex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    started = now_iso()
    t0 = time.perf_counter()
    seed = getattr(args, "seed", None)
    manifest = make_manifest(args.command, _config_echo(args), seed, started)
    try:
        payload, code, summary = _RUNNERS[args.command](args)
    except (UsageError, DomainError, InvalidDataError, ValueError) as exc:
        print(f"charex {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"charex {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    manifest["finished_at"] = now_iso()
    manifest["elapsed_seconds"] = round(time.perf_counter() - t0, 6)
    manifest["outcome"] = {"exit_code": code, "summary": summary}
    text = canonical_json({"manifest": manifest, "report": payload})
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.json and not args.out:
        sys.stdout.write(text)
    else:
        print(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
