"""Command-line front end.

Verbs:
  bounds      delay bounds for one system at one (M, m)
  sweep       hierarchy sweep over an (M, m) grid with monotonicity audit
  verify      run the inequality/orthogonality property suites
  crosscheck  diff the published closed-form matrix recipes against the
              exact basis-change construction

All results go to stdout; diagnostics to stderr.  Exit codes: 0 success,
1 input error, 2 no feasible delay found, 3 run dominated by inconclusive
solver probes, 4 hierarchy monotonicity violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

from .lmi import DelaySystem, HierarchyParams
from .projection import crosscheck_closed_forms
from .sdp import SolverOptions
from .search import (
    DEFAULT_BRACKET,
    DEFAULT_TOL,
    BracketError,
    DelayBoundsReport,
    NoFeasiblePointError,
    SweepResult,
    hierarchy_sweep,
    max_delay,
    min_delay,
    stability_interval,
)
from .systems import BUNDLED_SYSTEMS, SystemFileError, bundled_system_path, load_system
from .verification import DEFAULT_SEED, run_all

__all__ = ["main", "RunConfig"]

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_FEASIBLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_VIOLATION = 4

_ENV_PREFIX = "DELAYMARGIN_"


@dataclass
class RunConfig:
    """Validated run parameters (CLI flags plus environment overrides)."""

    big_m: int = 1
    m: int = 1
    tol: float = DEFAULT_TOL
    output_format: str = "text"
    seed: int = DEFAULT_SEED
    solver: SolverOptions = SolverOptions()

    def __post_init__(self):
        if self.big_m < 1:
            raise ValueError("M must be >= 1")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.output_format not in ("text", "json", "csv"):
            raise ValueError("format must be text, json or csv")


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(_ENV_PREFIX + name)
    return float(raw) if raw is not None else default


def _solver_options_from_env() -> SolverOptions:
    """Solver thresholds with environment overrides (DELAYMARGIN_*)."""
    max_iter_raw = os.environ.get(_ENV_PREFIX + "MAX_ITER")
    return SolverOptions(
        gap_tol=_env_float("GAP_TOL", SolverOptions.gap_tol),
        res_tol=_env_float("RES_TOL", SolverOptions.res_tol),
        feas_threshold=_env_float("FEAS_THRESHOLD", SolverOptions.feas_threshold),
        box_bound=_env_float("BOX_BOUND", SolverOptions.box_bound),
        max_iter=int(max_iter_raw) if max_iter_raw is not None else SolverOptions.max_iter,
    )


def _resolve_system(spec: str) -> tuple[DelaySystem, dict]:
    """Accept a file path or the name of a bundled benchmark system."""
    if spec in BUNDLED_SYSTEMS and not os.path.exists(spec):
        return load_system(bundled_system_path(spec))
    return load_system(spec)


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.5f}"


def _bounds_text(report: DelayBoundsReport) -> str:
    lines = [
        f"system          {report.system}",
        f"parameters      M={report.big_m}  m={report.m}  (NoDV {report.nodv})",
        f"direction       {report.direction}",
    ]
    if report.direction in ("lower", "interval"):
        lines.append(f"tau_lower       {_fmt(report.tau_lower)}")
    if report.direction in ("upper", "interval"):
        lines.append(f"tau_upper       {_fmt(report.tau_upper)}")
    if report.range_certified is not None:
        lines.append(f"range certified {report.range_certified}")
    lines.append(
        f"probes          {len(report.probes)} "
        f"({report.inconclusive_probes} inconclusive), {report.wall_time_s:.2f}s"
    )
    for note in report.notes:
        lines.append(f"note            {note}")
    return "\n".join(lines)


def _bounds_csv(report: DelayBoundsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["system", "M", "m", "direction", "tau_lower", "tau_upper", "nodv",
         "probes", "inconclusive", "wall_time_s"]
    )
    writer.writerow(
        [report.system, report.big_m, report.m, report.direction,
         "" if report.tau_lower is None else repr(report.tau_lower),
         "" if report.tau_upper is None else repr(report.tau_upper),
         report.nodv, len(report.probes), report.inconclusive_probes,
         f"{report.wall_time_s:.3f}"]
    )
    return buf.getvalue().rstrip("\n")


def _sweep_text(result: SweepResult) -> str:
    lines = []
    header = f"{'m':>3} {'M':>3} {'tau_upper':>12} {'NoDV':>6}"
    lines.append(header)
    lines.append("-" * len(header))
    for (big_m, m), rep in sorted(result.cells.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        lines.append(f"{m:>3} {big_m:>3} {_fmt(rep.tau_upper):>12} {rep.nodv:>6}")
    for (big_m, m), msg in sorted(result.errors.items()):
        lines.append(f"  (M={big_m}, m={m}) failed: {msg}")
    if result.violations:
        lines.append("monotonicity violations:")
        for v in result.violations:
            lines.append(
                f"  {v['direction']}: (M={v['from']['M']}, m={v['from']['m']}) "
                f"tau={v['from']['tau']:.5f} -> (M={v['to']['M']}, m={v['to']['m']}) "
                f"tau={v['to']['tau']:.5f}"
            )
    else:
        lines.append("monotonicity violations: none")
    return "\n".join(lines)


def _sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["M", "m", "tau_upper", "nodv", "probes", "wall_time_s"])
    for (big_m, m), rep in sorted(result.cells.items()):
        writer.writerow(
            [big_m, m, "" if rep.tau_upper is None else repr(rep.tau_upper),
             rep.nodv, len(rep.probes), f"{rep.wall_time_s:.3f}"]
        )
    return buf.getvalue().rstrip("\n")


def cmd_bounds(args: argparse.Namespace) -> int:
    try:
        config = RunConfig(
            big_m=args.M, m=args.m, tol=args.tol,
            output_format=args.format, seed=args.seed,
            solver=_solver_options_from_env(),
        )
        system, _ = _resolve_system(args.system)
    except (SystemFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    params = HierarchyParams(config.big_m, config.m)
    try:
        if args.direction == "upper":
            _, report = max_delay(system, params, DEFAULT_BRACKET, config.tol, config.solver)
        elif args.direction == "lower":
            _, report = min_delay(system, params, DEFAULT_BRACKET, config.tol, config.solver)
        else:
            report = stability_interval(system, params, DEFAULT_BRACKET, config.tol, config.solver)
    except (NoFeasiblePointError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    if config.output_format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    elif config.output_format == "csv":
        print(_bounds_csv(report))
    else:
        print(_bounds_text(report))
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    if report.inconclusive_probes > len(report.probes) // 2:
        print("warning: run dominated by inconclusive solver probes", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = RunConfig(
            big_m=args.M, m=max(args.m, 1), tol=args.tol,
            output_format=args.format, seed=args.seed,
            solver=_solver_options_from_env(),
        )
        system, _ = _resolve_system(args.system)
    except (SystemFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = hierarchy_sweep(
        system,
        range(1, config.big_m + 1),
        range(1, config.m + 1),
        tol=config.tol,
        options=config.solver,
    )
    if config.output_format == "json":
        print(json.dumps(result.to_dict(), indent=2))
    elif config.output_format == "csv":
        print(_sweep_csv(result))
    else:
        print(_sweep_text(result))
    if not result.cells:
        print("error: every sweep cell failed", file=sys.stderr)
        return EXIT_NO_FEASIBLE
    if result.violations:
        print("warning: hierarchy monotonicity violated", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    report = run_all(
        seed=args.seed,
        max_m=args.max_m,
        max_big_m=args.max_M,
        soundness_cases=args.cases,
        dominance_cases=max(args.cases // 2, 50),
    )
    print(f"seed {report.seed}: {report.checks_run} checks, "
          f"{len(report.failures)} failures")
    for failure in report.failures:
        print(f"FAIL {failure}")
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_crosscheck(args: argparse.Namespace) -> int:
    clean = True
    for m in range(args.max_m + 1):
        for big_m in range(1, args.max_M + 1):
            nu = big_m - 1 - m
            if nu < 0:
                continue
            report = crosscheck_closed_forms(m, nu, big_m)
            clean &= report.clean
            for line in report.lines():
                print(line)
    print("closed-form crosscheck:", "clean" if clean else "DISCREPANCIES FOUND")
    return EXIT_OK if clean else EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaymargin",
        description="Certified delay-stability bounds for linear time-delay systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_system: bool = True):
        if with_system:
            p.add_argument(
                "--system", required=True,
                help=f"system JSON file, or one of {', '.join(BUNDLED_SYSTEMS)}",
            )
        p.add_argument("--M", type=int, default=1, help="moment order (>= 1)")
        p.add_argument("--m", type=int, default=1, help="weight depth (>= 0)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="bisection tolerance")
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p_bounds = sub.add_parser("bounds", help="delay bounds at one (M, m)")
    common(p_bounds)
    p_bounds.add_argument(
        "--direction", choices=("upper", "lower", "interval"), default="upper"
    )
    p_bounds.set_defaults(func=cmd_bounds)

    p_sweep = sub.add_parser(
        "sweep", help="hierarchy sweep over M=1..M, m=1..m with monotonicity audit"
    )
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the inequality property suites")
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--cases", type=int, default=250)
    p_verify.add_argument("--max-m", dest="max_m", type=int, default=3)
    p_verify.add_argument("--max-M", dest="max_M", type=int, default=6)
    p_verify.set_defaults(func=cmd_verify)

    p_cross = sub.add_parser(
        "crosscheck", help="diff published closed forms against basis change"
    )
    p_cross.add_argument("--max-m", dest="max_m", type=int, default=3)
    p_cross.add_argument("--max-M", dest="max_M", type=int, default=6)
    p_cross.set_defaults(func=cmd_crosscheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses code 2 for usage errors
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
