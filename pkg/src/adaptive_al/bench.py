"""Suite runner and reporting: performance profiles, pairwise outperforming
factors and final-penalty histograms."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .nlp_core import ConfigurationError
from .problems import SuiteProblem, builtin_problems
from .solver import SolverConfig, SolveStatus, solve, variant_config

__all__ = [
    "BenchRecord",
    "ProfileCurve",
    "OutperformingFactor",
    "RECORD_COLUMNS",
    "METRICS",
    "PENALTY_BINS",
    "run_suite",
    "performance_profile",
    "outperforming_factors",
    "penalty_histogram",
    "write_records_csv",
    "read_records_csv",
    "write_profile_csvs",
    "write_histogram_csv",
    "summary_json",
]

RECORD_COLUMNS = ("problem", "variant", "flag", "iters", "funcs", "grads", "time_s",
                  "mu_final", "c_inf", "fl_inf")

METRICS = {
    "iterations": "iters", "iters": "iters",
    "function_evals": "funcs", "funcs": "funcs",
    "gradient_evals": "grads", "grads": "grads",
}

PROFILE_LOG2_MAX = 16

SUCCESS = {SolveStatus.FIRST_ORDER_STATIONARY.value, SolveStatus.INFEASIBLE_STATIONARY.value}


@dataclass(frozen=True)
class BenchRecord:
    problem: str
    variant: str
    flag: str
    iters: int
    funcs: int
    grads: int
    time_s: float
    mu_final: float
    c_inf: float
    fl_inf: float

    def __post_init__(self):
        if min(self.iters, self.funcs, self.grads) < 0:
            raise ConfigurationError("counts must be nonnegative")
        if self.flag not in {s.value for s in SolveStatus}:
            raise ConfigurationError(f"unknown flag {self.flag!r}")

    @property
    def solved(self):
        return self.flag in SUCCESS


def _resolve_metric(metric):
    try:
        return METRICS[metric]
    except KeyError:
        raise ConfigurationError(
            f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None


def _run_pair(entry, variant, config, timing):
    try:
        rep = solve(entry.problem, config)
    except Exception as exc:  # noqa: BLE001 - one failure must not end the suite
        nan = float("nan")
        return BenchRecord(entry.name, variant, SolveStatus.INTERNAL_ERROR.value, 0, 0, 0,
                           0.0, nan, nan, nan), exc
    return BenchRecord(entry.name, variant, rep.status.value, rep.iterations,
                       rep.function_evals, rep.gradient_evals,
                       rep.time_s if timing else 0.0, rep.mu, rep.c_inf, rep.fl_inf), None


def run_suite(variants, problems=None, config=None, timing=True, workers=1):
    """Solve every (variant, problem) pair.

    Parameters
    ----------
    variants : list
        Variant names, or ``(name, SolverConfig)`` pairs for custom settings.
    problems : list, optional
        Problem names or :class:`SuiteProblem` entries; all built-in problems
        by default.
    config : SolverConfig, optional
        Base settings that named variants are layered on.
    timing : bool
        Record wall time; ``False`` writes ``0.0`` so outputs are reproducible
        byte for byte.
    workers : int
        Thread count.  Records come back sorted by ``(problem, variant)``.
    """
    registry = None
    entries = []
    for p in (problems if problems is not None else builtin_problems().values()):
        if isinstance(p, SuiteProblem):
            entries.append(p)
            continue
        registry = registry or builtin_problems()
        if p not in registry:
            raise ConfigurationError(f"unknown problem {p!r}")
        entries.append(registry[p])
    configs = []
    for v in variants:
        if isinstance(v, tuple):
            configs.append(v)
        else:
            configs.append((v, variant_config(v, config or SolverConfig())))

    jobs = [(e, name, cfg) for e in entries for name, cfg in configs]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda job: _run_pair(*job, timing), jobs))
    else:
        results = [_run_pair(*job, timing) for job in jobs]
    return sorted((rec for rec, _ in results), key=lambda r: (r.problem, r.variant))


@dataclass
class ProfileCurve:
    """Dolan-More profile for one variant.

    ``points`` are ``(tau, fraction)`` pairs at increasing ``tau``;
    ``solved_fraction`` is the limit as ``tau`` grows.
    """

    variant: str
    points: list
    solved_fraction: float

    def fraction_at(self, tau):
        frac = 0.0
        for t, f in self.points:
            if t <= tau:
                frac = f
        return frac

    def log2_points(self):
        return [(math.log2(t), f) for t, f in self.points]


def _by_problem(records):
    table = {}
    for r in records:
        table.setdefault(r.problem, {})[r.variant] = r
    return table


def _metric_value(rec, key):
    value = getattr(rec, key)
    return max(value, 1)


def performance_profile(records, metric="iterations"):
    """Profiles over the problems solved by at least one variant.

    Zero counts are treated as 1 so ratios stay finite.  The ``tau`` grid is
    ``2**0 .. 2**16`` plus every observed ratio up to ``2**16``.
    """
    key = _resolve_metric(metric)
    table = _by_problem(records)
    variants = sorted({r.variant for r in records})
    for prob, row in table.items():
        missing = set(variants) - set(row)
        if missing:
            raise ConfigurationError(f"problem {prob!r} lacks records for {sorted(missing)}")

    ratios = {v: [] for v in variants}
    for prob in sorted(table):
        row = table[prob]
        solved = [_metric_value(r, key) for r in row.values() if r.solved]
        if not solved:
            continue
        best = min(solved)
        for v in variants:
            r = row[v]
            ratios[v].append(_metric_value(r, key) / best if r.solved else math.inf)

    tau_max = 2.0 ** PROFILE_LOG2_MAX
    grid = {2.0 ** i for i in range(PROFILE_LOG2_MAX + 1)}
    for vals in ratios.values():
        grid.update(t for t in vals if t <= tau_max)
    grid = sorted(grid)

    curves = []
    for v in variants:
        vals = np.asarray(ratios[v], dtype=float)
        count = vals.size
        points = [(t, float(np.sum(vals <= t)) / count if count else 0.0) for t in grid]
        solved = float(np.sum(np.isfinite(vals))) / count if count else 0.0
        curves.append(ProfileCurve(v, points, solved))
    return curves


@dataclass(frozen=True)
class OutperformingFactor:
    """``raw = -log2(m_A / m_B)``; ``None`` when either side failed.

    ``display`` is ``raw`` clipped to ``[-2, 2]``.  ``zero_adjusted`` marks a
    zero count that was replaced by 1.
    """

    problem: str
    raw: float | None
    display: float | None
    a_failed: bool
    b_failed: bool
    zero_adjusted: bool


def outperforming_factors(records, a, b, metric="iterations"):
    key = _resolve_metric(metric)
    out = []
    for prob, row in sorted(_by_problem(records).items()):
        if a not in row or b not in row:
            raise ConfigurationError(f"problem {prob!r} lacks a record for {a!r} or {b!r}")
        ra, rb = row[a], row[b]
        ma, mb = getattr(ra, key), getattr(rb, key)
        zero = ma == 0 or mb == 0
        if ra.solved and rb.solved:
            # difference of logs keeps r_AB == -r_BA exactly
            raw = math.log2(max(mb, 1)) - math.log2(max(ma, 1))
            display = min(2.0, max(-2.0, raw))
        else:
            raw = display = None
        out.append(OutperformingFactor(prob, raw, display, not ra.solved, not rb.solved, zero))
    return out


PENALTY_BINS = (
    ("1", 1.0, math.inf),
    ("[1e-1,1)", 1e-1, 1.0),
    ("[1e-2,1e-1)", 1e-2, 1e-1),
    ("[1e-3,1e-2)", 1e-3, 1e-2),
    ("[1e-4,1e-3)", 1e-4, 1e-3),
    ("[1e-5,1e-4)", 1e-5, 1e-4),
    ("[1e-6,1e-5)", 1e-6, 1e-5),
    ("(0,1e-6)", 0.0, 1e-6),
)


def penalty_bin(mu):
    """Label of the half-open bin holding ``mu``; ``mu >= 1`` goes to ``"1"``."""
    if not mu > 0:
        return "n/a"
    for label, lo, hi in PENALTY_BINS:
        if lo <= mu < hi:
            return label
    return "n/a"


def penalty_histogram(records):
    """``variant -> {bin label: count}`` with every bin present.

    Records without a final penalty value (crashed solves) are counted under
    an extra ``"n/a"`` key, which only appears when needed.
    """
    table = {}
    for r in records:
        row = table.setdefault(r.variant, {label: 0 for label, _, _ in PENALTY_BINS})
        label = penalty_bin(r.mu_final)
        row[label] = row.get(label, 0) + 1
    return dict(sorted(table.items()))


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([_fmt(getattr(r, c)) for c in RECORD_COLUMNS])


def read_records_csv(path):
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RECORD_COLUMNS:
            raise ConfigurationError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            records.append(BenchRecord(
                row["problem"], row["variant"], row["flag"], int(row["iters"]),
                int(row["funcs"]), int(row["grads"]), float(row["time_s"]),
                float(row["mu_final"]), float(row["c_inf"]), float(row["fl_inf"])))
    return records


def write_profile_csvs(curves, directory, metric):
    """One ``profile_<metric>_<variant>.csv`` per curve; returns the paths."""
    paths = []
    for curve in curves:
        path = f"{directory}/profile_{metric}_{curve.variant}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("log2_tau", "fraction"))
            for lt, frac in curve.log2_points():
                writer.writerow((_fmt(lt), _fmt(frac)))
        paths.append(path)
    return paths


def write_histogram_csv(histogram, path):
    labels = [label for label, _, _ in PENALTY_BINS]
    if any("n/a" in row for row in histogram.values()):
        labels.append("n/a")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bin", *histogram.keys()))
        for label in labels:
            writer.writerow((label, *(row.get(label, 0) for row in histogram.values())))


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def summary_json(records, curves=None, histogram=None):
    """JSON text mirroring the CSV outputs."""
    doc = {"records": [{k: _jsonable(v) for k, v in asdict(r).items()} for r in records]}
    if curves is not None:
        doc["profiles"] = {c.variant: {"solved_fraction": c.solved_fraction,
                                       "log2_points": c.log2_points()} for c in curves}
    if histogram is not None:
        doc["penalty_histogram"] = histogram
    return json.dumps(doc, indent=2, sort_keys=True)
