"""Command-line driver.

Subcommands::

    solve    one problem with one variant, optional CSV trace
    bench    every selected (variant, problem) pair, records CSV + JSON
    profile  performance profiles from a records CSV
    report   final-penalty histogram from a records CSV

Exit codes: 0 stationary (either kind), 2 iteration or time limit, 3 solver
error, 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench
from .nlp_core import ConfigurationError, InternalError
from .problems import builtin_problems
from .solver import VARIANTS, SolverConfig, SolveStatus, solve, variant_config

EXIT_OK = 0
EXIT_LIMIT = 2
EXIT_ERROR = 3
EXIT_USAGE = 64

TIME_LIMIT_ENV = "STEER_AL_TIME_LIMIT_S"

_EXIT_BY_STATUS = {
    SolveStatus.FIRST_ORDER_STATIONARY: EXIT_OK,
    SolveStatus.INFEASIBLE_STATIONARY: EXIT_OK,
    SolveStatus.ITERATION_LIMIT: EXIT_LIMIT,
    SolveStatus.TIME_LIMIT: EXIT_LIMIT,
    SolveStatus.EVALUATION_ERROR: EXIT_ERROR,
    SolveStatus.INTERNAL_ERROR: EXIT_ERROR,
}


def exit_code(status):
    return _EXIT_BY_STATUS[SolveStatus(status)]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser():
    parser = _Parser(prog="adaptive-al", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def config_flags(p):
        p.add_argument("--config", type=Path, help="key = value file overriding defaults")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one setting (repeatable, applied after --config)")
        p.add_argument("--time-limit", type=float, help=f"seconds per solve (overrides ${TIME_LIMIT_ENV})")

    p = sub.add_parser("solve", help="solve one problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--variant", default="aalls", help=f"one of {', '.join(VARIANTS)}")
    p.add_argument("--trace", type=Path, help="write the per-iteration trace CSV here")
    config_flags(p)

    p = sub.add_parser("bench", help="run the suite")
    p.add_argument("--variants", type=_csv_list, default=list(VARIANTS),
                   help="comma-separated variant names")
    p.add_argument("--problems", type=_csv_list, help="comma-separated problem names (default: all)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="write time_s = 0 for byte-reproducible output")
    config_flags(p)

    p = sub.add_parser("profile", help="performance profiles from records")
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--metric", default="iterations", choices=sorted(bench.METRICS))
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("report", help="final-penalty histogram from records")
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("."))

    sub.add_parser("list", help="list problems and variants")
    return parser


def _config(args, base=None):
    cfg = base or SolverConfig()
    if args.config is not None:
        cfg = SolverConfig.from_file(args.config, cfg)
    env = os.environ.get(TIME_LIMIT_ENV)
    if env:
        cfg = cfg.replace(time_limit=float(env))
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    cfg = SolverConfig.from_mapping(overrides, cfg)
    if args.time_limit is not None:
        cfg = cfg.replace(time_limit=args.time_limit)
    return cfg


def _check_variants(names):
    if not names:
        raise UsageError("empty variant list")
    unknown = [v for v in names if v not in VARIANTS]
    if unknown:
        raise UsageError(f"unknown variant(s) {unknown}; choose from {list(VARIANTS)}")


def _check_problems(names):
    registry = builtin_problems()
    unknown = [p for p in names if p not in registry]
    if unknown:
        raise UsageError(f"unknown problem(s) {unknown}")


def _cmd_solve(args):
    _check_variants([args.variant])
    _check_problems([args.problem])
    cfg = variant_config(args.variant, _config(args))
    if args.trace is not None:
        cfg = cfg.replace(trace=True)
    entry = builtin_problems()[args.problem]
    try:
        report = solve(entry.problem, cfg)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        for key, value in exc.state.items():
            print(f"  {key} = {value}", file=sys.stderr)
        return EXIT_ERROR
    print(f"problem={args.problem} variant={args.variant}")
    print(report.summary())
    if report.message:
        print(report.message)
    if args.trace is not None:
        report.write_trace_csv(args.trace)
    return exit_code(report.status)


def _cmd_bench(args):
    _check_variants(args.variants)
    if args.problems is not None:
        if not args.problems:
            raise UsageError("empty problem list")
        _check_problems(args.problems)
    cfg = _config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    records = bench.run_suite(args.variants, args.problems, cfg,
                              timing=not args.no_timing, workers=args.workers)
    bench.write_records_csv(records, args.out / "records.csv")
    (args.out / "records.json").write_text(bench.summary_json(records) + "\n", encoding="utf-8")
    solved = {}
    for r in records:
        solved.setdefault(r.variant, [0, 0, 0])
        solved[r.variant][0] += r.solved
        solved[r.variant][1] += 1
        solved[r.variant][2] += r.iters
    for variant, (ok, total, iters) in sorted(solved.items()):
        print(f"{variant:12s} solved {ok}/{total}  iterations {iters}")
    return EXIT_OK


def _cmd_profile(args):
    records = bench.read_records_csv(args.records)
    curves = bench.performance_profile(records, args.metric)
    args.out.mkdir(parents=True, exist_ok=True)
    for path in bench.write_profile_csvs(curves, args.out, args.metric):
        print(path)
    (args.out / f"profile_{args.metric}.json").write_text(
        bench.summary_json(records, curves=curves) + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_report(args):
    records = bench.read_records_csv(args.records)
    hist = bench.penalty_histogram(records)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "penalty_histogram.csv"
    bench.write_histogram_csv(hist, path)
    (args.out / "penalty_histogram.json").write_text(
        bench.summary_json(records, histogram=hist) + "\n", encoding="utf-8")
    print(path)
    return EXIT_OK


def _cmd_list(args):
    for name, entry in builtin_problems().items():
        p = entry.problem
        tag = " infeasible" if entry.infeasible else ""
        print(f"{name:22s} n={p.n:<3d} m={p.m:<3d}{tag}")
    print("variants:", ", ".join(VARIANTS))
    return EXIT_OK


_COMMANDS = {"solve": _cmd_solve, "bench": _cmd_bench, "profile": _cmd_profile,
             "report": _cmd_report, "list": _cmd_list}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
