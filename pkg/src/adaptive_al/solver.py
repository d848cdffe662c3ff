"""Outer augmented Lagrangian iterations with penalty-parameter steering.

Four method families share one pipeline and differ in two switches:

* ``variant``: step acceptance by an Armijo line search on the convexified
  model, or by a trust-region ratio test on the plain quadratic model;
* ``steering``: the adaptive penalty update (``on``), the same but disabled
  once ``mu <= safeguard_mu`` (``safeguarded``), or none (``off``), in which
  case the classical multiplier/penalty update is used.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .al_model import (
    AlPoint,
    al_hessian_operator,
    curvature,
    pi,
    reduction_quadratic,
    reduction_qtilde,
    reduction_qv,
)
from .cauchy import cauchy_al, cauchy_feasibility, step_norm
from .nlp_core import (
    ConfigurationError,
    DomainError,
    EvaluationError,
    InternalError,
    prescale,
    residual_FAL,
    residual_FFEAS,
    residual_FL,
)
from .qp_subproblem import QpSpec, sanity_check_step, solve_bound_qp

__all__ = [
    "Steering",
    "Variant",
    "SolveStatus",
    "SolverConfig",
    "VARIANTS",
    "variant_config",
    "Targets",
    "IterationRecord",
    "SolveReport",
    "initialize_targets",
    "update_delta",
    "compute_radii",
    "armijo_backtrack",
    "line_search",
    "zero_al_guard",
    "steering_rhs",
    "steering_loop",
    "SteeringResult",
    "update_multipliers_and_targets",
    "solve",
    "solve_tr",
    "TRACE_COLUMNS",
]

log = logging.getLogger(__name__)


class Steering(str, enum.Enum):
    OFF = "off"
    ON = "on"
    SAFEGUARDED = "safeguarded"


class Variant(str, enum.Enum):
    LINE_SEARCH = "line_search"
    TRUST_REGION = "trust_region"


class SolveStatus(str, enum.Enum):
    FIRST_ORDER_STATIONARY = "first_order_stationary"
    INFEASIBLE_STATIONARY = "infeasible_stationary"
    ITERATION_LIMIT = "iteration_limit"
    TIME_LIMIT = "time_limit"
    EVALUATION_ERROR = "evaluation_error"
    INTERNAL_ERROR = "internal_error"

    @property
    def stationary(self):
        return self in (SolveStatus.FIRST_ORDER_STATIONARY, SolveStatus.INFEASIBLE_STATIONARY)


_OPEN_UNIT = ("gamma", "gamma_mu", "gamma_t", "gamma_T", "kappa_3", "eps_r", "kappa_t",
              "eta_s", "eta_vs", "gamma_alpha", "steering_decrease")


@dataclass(frozen=True)
class SolverConfig:
    """Solver constants.  Defaults reproduce the published parameter table."""

    gamma: float = 0.5
    gamma_mu: float = 0.1
    gamma_t: float = 0.1
    gamma_T: float = 0.1
    kappa_1: float = 1.0
    kappa_2: float = 1.0
    kappa_3: float = 1e-4
    eps_r: float = 1e-4
    kappa_t: float = 0.9
    eta_s: float = 1e-4
    eta_vs: float = 0.9
    epsilon: float = 0.5
    # target floors: tighter targets than the stopping tolerances only
    # leave the multiplier test to rounding
    t_min: float = 1e-7
    T_min: float = 1e-7
    mu0: float = 1.0
    kappa_opt: float = 1e-5
    kappa_feas: float = 1e-5
    mu_min: float = 1e-8
    k_max: int = 10_000
    G: float = 1e2
    gamma_alpha: float = 0.5
    steering_decrease: float = 0.7
    steering: Steering = Steering.ON
    safeguard_mu: float = 1e-4
    variant: Variant = Variant.LINE_SEARCH
    prescale: bool = True
    time_limit: float = 300.0
    delta0: float = 1.0
    ls_delta_grow: float = 5.0 / 3.0
    ls_delta_shrink: float = 0.5
    tr_delta_grow: float = 2.0
    tr_delta_shrink: float = 0.5
    max_steering_cuts: int = 500
    max_armijo_backtracks: int = 60
    max_null_steps: int = 200
    trace: bool = False
    store_vectors: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steering", Steering(self.steering))
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in _OPEN_UNIT:
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigurationError(f"{name}={value} must lie in (0, 1)")
        for name in ("kappa_1", "kappa_2"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must lie in (0, 1]")
        if self.eta_vs < self.eta_s:
            raise ConfigurationError("eta_vs must be at least eta_s")
        if self.t_min < 0 or self.T_min < 0:
            raise ConfigurationError("t_min and T_min must be nonnegative")
        for name in ("mu0", "epsilon", "kappa_opt", "kappa_feas", "mu_min", "G", "delta0",
                     "time_limit"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.k_max < 0:
            raise ConfigurationError("k_max must be nonnegative")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, values, base=None):
        """Override ``base`` (default: the defaults) field by field."""
        base = cls() if base is None else base
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        changes = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigurationError(f"unknown configuration key {key!r}")
            default = getattr(base, key)
            if isinstance(default, bool):
                if isinstance(raw, str):
                    if raw.lower() not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                        raise ConfigurationError(f"{key}: cannot parse {raw!r} as a boolean")
                    raw = raw.lower() in ("1", "true", "yes", "on")
                changes[key] = bool(raw)
            elif isinstance(default, enum.Enum):
                changes[key] = type(default)(raw)
            elif isinstance(default, int):
                changes[key] = int(float(raw))
            else:
                changes[key] = float(raw)
        return base.replace(**changes)

    @classmethod
    def from_file(cls, path, base=None):
        """Read flat ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(f"{path}:{lineno}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                values[key] = value
        return cls.from_mapping(values, base)


VARIANTS = {
    "balls": dict(variant=Variant.LINE_SEARCH, steering=Steering.OFF),
    "baltr": dict(variant=Variant.TRUST_REGION, steering=Steering.OFF),
    "aalls": dict(variant=Variant.LINE_SEARCH, steering=Steering.ON),
    "aaltr": dict(variant=Variant.TRUST_REGION, steering=Steering.ON),
    "aalls-safe": dict(variant=Variant.LINE_SEARCH, steering=Steering.SAFEGUARDED),
    "aaltr-safe": dict(variant=Variant.TRUST_REGION, steering=Steering.SAFEGUARDED),
}


def variant_config(name, base=None):
    if name not in VARIANTS:
        raise ConfigurationError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}")
    return (base or SolverConfig()).replace(**VARIANTS[name])


@dataclass
class Targets:
    """Feasibility target ``t``, optimality target ``T`` and their counter ``j``."""

    t: float
    T: float
    j: int = 1


def initialize_targets(c_inf, fl_inf):
    """``t1 = max(1e2, min(1e4, ||c||_inf))``, ``T1 = max(1, min(1e2, ||F_L||_inf))``."""
    return max(1e2, min(1e4, c_inf)), max(1.0, min(1e2, fl_inf))


def update_delta(delta, alpha, grow=5.0 / 3.0, shrink=0.5):
    """Dynamic radius scale for line-search methods."""
    return delta * grow if alpha == 1.0 else delta * shrink


def compute_radii(delta, ffeas_2, fal_2, gamma_k):
    """Radii ``delta ||F_FEAS||_2`` and ``gamma_k delta ||F_AL||_2``."""
    return delta * ffeas_2, gamma_k * delta * fal_2


def armijo_backtrack(phi, phi0, predicted, eta=1e-4, gamma_alpha=0.5, max_backtracks=60):
    """Smallest ``l >= 0`` with ``phi(gamma_alpha**l) <= phi0 - eta gamma_alpha**l predicted``.

    Returns ``(alpha, phi(alpha), evaluations)`` or ``None`` if more than
    ``max_backtracks`` cuts would be needed.  ``phi`` may return a tuple whose
    first entry is the merit value; the whole tuple is passed back.
    """
    alpha = 1.0
    for l in range(max_backtracks + 1):
        out = phi(alpha)
        value = out[0] if isinstance(out, tuple) else out
        if value <= phi0 - eta * alpha * predicted:
            return alpha, out, l + 1
        alpha *= gamma_alpha
    return None


@dataclass
class LineSearchResult:
    alpha: float
    x: np.ndarray
    f: float
    c: np.ndarray
    L: float
    evaluations: int


def _eval_fc(problem, x):
    f = float(problem.eval_f(x))
    c = np.asarray(problem.eval_c(x), dtype=float) if problem.m else np.zeros(0)
    if not (math.isfinite(f) and np.all(np.isfinite(c))):
        raise EvaluationError("non-finite function value")
    return f, c


def _al_value(mu, f, c, y):
    return mu * (f - float(c @ y)) + 0.5 * float(c @ c)


def line_search(point, s, predicted, eta_s=1e-4, gamma_alpha=0.5, max_backtracks=60):
    """Armijo backtracking on ``L(., y, mu)`` along ``s`` from ``point``.

    ``predicted`` is the convexified model reduction of ``s`` and must be
    positive.  Returns ``None`` when the backtracking cap is exceeded.
    """
    if not predicted > 0:
        raise DomainError("line search needs a positive predicted reduction")
    if not np.any(s):
        raise DomainError("line search along a zero step")
    problem = point.problem

    def phi(alpha):
        x = problem.project(point.x + alpha * s)
        f, c = _eval_fc(problem, x)
        return _al_value(point.mu, f, c, point.y), x, f, c

    found = armijo_backtrack(phi, point.L, predicted, eta_s, gamma_alpha, max_backtracks)
    if found is None:
        return None
    alpha, (L, x, f, c), evals = found
    return LineSearchResult(alpha, x, f, c, L, evals)


def zero_al_guard(point, gamma_mu=0.1, stop=None, floor=1e-300):
    """Cut ``mu`` by ``gamma_mu`` while ``F_AL`` vanishes exactly.

    ``stop(point)`` is consulted after every cut; when it returns true the
    loop ends early (used for the infeasible-stationarity test, which depends
    on ``mu``).  Returns ``(point, cuts)``.
    """
    cuts = 0
    problem = point.problem
    while not np.any(residual_FAL(problem, point.x, point.y, point.mu, point.g, point.c)):
        if stop is not None and stop(point):
            break
        mu = point.mu * gamma_mu
        if mu < floor:
            raise InternalError("penalty parameter underflow in the zero-F_AL loop",
                                {"x": point.x, "y": point.y})
        point = point.with_mu(mu)
        cuts += 1
        if stop is not None and stop(point):
            break
    return point, cuts


def _below_resolution(point, reduction, factor=64.0):
    """True when a predicted decrease is lost in the rounding of ``L``, so neither
    the Armijo test nor the ratio test can confirm it."""
    scale = (point.mu * (abs(point.f) + abs(float(point.c @ point.y)))
             + 0.5 * float(point.c @ point.c))
    return reduction <= factor * np.finfo(float).eps * scale


def steering_rhs(red_qv_r, v, t, kappa_3=1e-4, kappa_t=0.9):
    """Required violation-model decrease ``min(kappa_3 dqv(r), v - 0.5 (kappa_t t)^2)``."""
    return min(kappa_3 * red_qv_r, v - 0.5 * (kappa_t * t) ** 2)


@dataclass
class SteeringResult:
    point: AlPoint
    Theta: float
    cauchy: object
    F_AL: np.ndarray
    cuts: list

    @property
    def mu(self):
        return self.point.mu


def steering_loop(point, rhs, al_cauchy, cfg, current=None):
    """Decrease ``mu`` until the AL Cauchy step predicts enough violation decrease.

    Parameters
    ----------
    point : AlPoint
    rhs : float
        Output of :func:`steering_rhs`; fixed for the iteration.
    al_cauchy : callable
        ``point -> (Theta, AlCauchyResult, F_AL)`` at that point's ``mu``.
    cfg : SolverConfig
        Supplies ``steering_decrease``, the safeguard and the cut cap.
    current : tuple, optional
        ``al_cauchy(point)`` if already computed.

    Returns
    -------
    SteeringResult
        ``cuts`` lists the penalty value in force before each cut.
    """
    Theta, al, fal = current if current is not None else al_cauchy(point)
    cuts = []
    while True:
        if reduction_qv(point, al.s_cauchy) >= rhs and np.any(fal):
            break
        if cfg.steering is Steering.SAFEGUARDED and point.mu <= cfg.safeguard_mu:
            break
        if len(cuts) >= cfg.max_steering_cuts:
            raise InternalError("steering loop did not terminate",
                                {"x": point.x, "mu": point.mu})
        cuts.append(point.mu)
        point = point.with_mu(cfg.steering_decrease * point.mu)
        Theta, al, fal = al_cauchy(point)
    return SteeringResult(point, Theta, al, fal, cuts)


def update_multipliers_and_targets(point_next, targets, cfg, adaptive=True):
    """Multiplier, target and (classical variant) penalty updates after a step.

    ``point_next`` is evaluated at ``(x_{k+1}, y_k, mu_k)``.  Returns
    ``(y, mu, targets, updated)``.
    """
    problem = point_next.problem
    x, y, mu = point_next.x, point_next.y, point_next.mu
    c_norm = float(np.linalg.norm(point_next.c))
    t, T, j = targets.t, targets.T, targets.j
    t_next = max(min(cfg.gamma_t * t, t ** (1.0 + cfg.epsilon)), min(t, cfg.t_min))
    T_next = max(cfg.gamma_T * T, min(T, cfg.T_min))
    tightened = Targets(t_next, T_next, j + 1)
    fal = float(np.linalg.norm(
        residual_FAL(problem, x, y, mu, point_next.g, point_next.c)))

    if not adaptive:
        if fal > T:
            return y, mu, targets, False
        if c_norm <= t:
            return pi(point_next.c, y, mu), mu, tightened, True
        return y, cfg.gamma_mu * mu, targets, False

    if c_norm > t:
        return y, mu, targets, False
    y_pi = pi(point_next.c, y, mu)
    fl_pi = float(np.linalg.norm(residual_FL(problem, x, y_pi, point_next.g)))
    fl_y = float(np.linalg.norm(residual_FL(problem, x, y, point_next.g)))
    y_hat, fl_hat = (y_pi, fl_pi) if fl_pi <= fl_y else (y, fl_y)
    if min(fl_hat, fal) <= T:
        return y_hat, mu, tightened, True
    return y, mu, targets, False


TRACE_COLUMNS = ("k", "mu", "c_inf", "fl_inf", "fal_2", "alpha_or_rho", "delta", "j", "t", "T")


@dataclass
class IterationRecord:
    """Everything needed to re-check one iteration after the fact.

    ``mu`` is the penalty parameter used for the step (after steering);
    ``mu_start`` the value on entry.  Vectors are filled only when the
    solver runs with ``store_vectors``.
    """

    k: int
    mu_start: float
    mu: float
    c_inf: float
    fl_inf: float
    fal_2: float
    delta: float
    j: int
    t: float
    T: float
    theta: float
    Theta: float
    gamma_k: float
    eps_k: float
    beta: float
    alpha_cauchy: float
    steering_active: bool
    steering_cuts: list
    red_qv_r: float
    red_qv_s: float
    v: float
    red_model_s: float
    red_model_cauchy: float
    clamp_active: bool
    used_cauchy: bool
    qp_status: str
    accepted: bool = False
    alpha: Optional[float] = None
    rho: Optional[float] = None
    L_before: float = float("nan")
    L_after: float = float("nan")
    mu_after: float = float("nan")
    multiplier_update: bool = False
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    r_cauchy: Optional[np.ndarray] = None
    s_cauchy: Optional[np.ndarray] = None

    def row(self):
        step = self.alpha if self.alpha is not None else self.rho
        return (self.k, self.mu, self.c_inf, self.fl_inf, self.fal_2, step, self.delta,
                self.j, self.t, self.T)


@dataclass
class SolveReport:
    status: SolveStatus
    x: np.ndarray
    y: np.ndarray
    mu: float
    iterations: int
    function_evals: int
    gradient_evals: int
    c_inf: float
    fl_inf: float
    ffeas_inf: float
    f: float
    time_s: float
    variant: Variant
    steering: Steering
    scale: object = None
    message: str = ""
    trace: list = field(default_factory=list)

    def write_trace_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for rec in self.trace:
                writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                                 for v in rec.row()])

    def summary(self):
        return (f"status={self.status.value} iterations={self.iterations} "
                f"function_evals={self.function_evals} gradient_evals={self.gradient_evals} "
                f"mu={self.mu:.3e} c_inf={self.c_inf:.3e} fl_inf={self.fl_inf:.3e} "
                f"f={self.f:.10g} time_s={self.time_s:.3f}")


class _Solve:
    """One solve: owns the iterate, counters and trace."""

    def __init__(self, problem, cfg):
        self.problem = problem
        self.cfg = cfg
        self.line_search = cfg.variant is Variant.LINE_SEARCH
        self.adaptive = cfg.steering is not Steering.OFF
        self.nf = 0
        self.ng = 0
        self.trace = []

    def evaluate(self, x, y, mu):
        point = AlPoint.at(self.problem, x, y, mu)
        self.nf += 1
        self.ng += 1
        return point

    def first_order(self, fl_inf, c_inf):
        return fl_inf <= self.cfg.kappa_opt and c_inf <= self.cfg.kappa_feas

    def infeasible(self, ffeas_inf, c_inf, mu):
        return ffeas_inf <= self.cfg.kappa_opt and c_inf > self.cfg.kappa_feas and mu <= self.cfg.mu_min

    def run(self, x0, y0):
        cfg, problem = self.cfg, self.problem
        start = time.perf_counter()
        norm = np.inf
        reduction = reduction_qtilde if self.line_search else reduction_quadratic

        point = self.evaluate(x0, y0, cfg.mu0)
        c_inf = float(np.max(np.abs(point.c))) if problem.m else 0.0
        fl = residual_FL(problem, point.x, point.y, point.g)
        targets = Targets(*initialize_targets(c_inf, float(np.max(np.abs(fl)))))
        delta = cfg.delta0
        k = stalls = 0

        def report(status, message=""):
            fl = residual_FL(problem, point.x, point.y, point.g)
            ffeas = residual_FFEAS(problem, point.x, point.c)
            return SolveReport(
                status=status, x=point.x.copy(), y=point.y.copy(), mu=point.mu,
                iterations=k, function_evals=self.nf, gradient_evals=self.ng,
                c_inf=float(np.max(np.abs(point.c))) if problem.m else 0.0,
                fl_inf=float(np.max(np.abs(fl))), ffeas_inf=float(np.max(np.abs(ffeas))),
                f=point.f, time_s=time.perf_counter() - start, variant=cfg.variant,
                steering=cfg.steering, message=message,
                trace=self.trace if (cfg.trace or cfg.store_vectors) else [])

        while True:
            c_inf = float(np.max(np.abs(point.c))) if problem.m else 0.0
            fl = residual_FL(problem, point.x, point.y, point.g)
            fl_inf = float(np.max(np.abs(fl)))
            ffeas = residual_FFEAS(problem, point.x, point.c)
            ffeas_inf = float(np.max(np.abs(ffeas))) if ffeas.size else 0.0

            if self.first_order(fl_inf, c_inf):
                return report(SolveStatus.FIRST_ORDER_STATIONARY)
            if self.infeasible(ffeas_inf, c_inf, point.mu):
                return report(SolveStatus.INFEASIBLE_STATIONARY)
            if k >= cfg.k_max:
                return report(SolveStatus.ITERATION_LIMIT)
            if time.perf_counter() - start > cfg.time_limit:
                return report(SolveStatus.TIME_LIMIT)

            point, _ = zero_al_guard(
                point, cfg.gamma_mu,
                stop=lambda p: self.infeasible(ffeas_inf, c_inf, p.mu))
            if self.infeasible(ffeas_inf, c_inf, point.mu):
                return report(SolveStatus.INFEASIBLE_STATIONARY)
            mu_start = point.mu

            theta = delta * float(np.linalg.norm(ffeas))
            feas = cauchy_feasibility(point, theta, cfg.eps_r, cfg.gamma, norm)

            def al_cauchy(p):
                fal = residual_FAL(problem, p.x, p.y, p.mu, p.g, p.c)
                Theta = feas.gamma_k * delta * float(np.linalg.norm(fal))
                res = cauchy_al(p, Theta, feas.eps_k, cfg.eps_r, cfg.gamma, norm,
                                convexified=self.line_search)
                return Theta, res, fal

            Theta, al, fal = al_cauchy(point)
            if _below_resolution(point, reduction(point, al.s_cauchy)):
                # the subproblem is solved to working precision: take a null
                # step, cutting mu where the multipliers are blocked
                stalls += 1
                before = (point.mu, targets.t, targets.T)
                if float(np.linalg.norm(point.c)) > targets.t:
                    y, mu = point.y, point.mu * cfg.gamma_mu
                else:
                    y, mu, targets, _ = update_multipliers_and_targets(
                        point, targets, cfg, self.adaptive)
                still = before == (mu, targets.t, targets.T) and np.array_equal(y, point.y)
                if stalls > cfg.max_null_steps or still:
                    raise InternalError("numerical stall: no representable decrease in the "
                                        "augmented Lagrangian", {"k": k, "x": point.x,
                                                                 "mu": point.mu})
                point = point.with_y(y).with_mu(mu)
                continue
            stalls = 0

            red_r = reduction_qv(point, feas.r_cauchy)
            rhs = steering_rhs(red_r, point.v, targets.t, cfg.kappa_3, cfg.kappa_t)
            steering_active = self.adaptive and not (
                cfg.steering is Steering.SAFEGUARDED and point.mu <= cfg.safeguard_mu)
            cuts = []
            if self.adaptive:
                steer = steering_loop(point, rhs, al_cauchy, cfg, (Theta, al, fal))
                point, Theta, al, fal, cuts = (steer.point, steer.Theta, steer.cauchy,
                                               steer.F_AL, steer.cuts)

            qp = solve_bound_qp(QpSpec.trust_region(
                al_hessian_operator(point), point.grad_L, point.x, problem.lower,
                problem.upper, Theta, al.s_cauchy))
            s = sanity_check_step(qp.step, al.s_cauchy, lambda d: reduction(point, d))
            red_s = reduction(point, s)
            red_sc = reduction(point, al.s_cauchy)
            if not (red_s >= cfg.kappa_1 * red_sc and red_sc > 0):
                raise InternalError("search direction lacks Cauchy decrease",
                                    {"k": k, "red_s": red_s, "red_cauchy": red_sc,
                                     "x": point.x, "mu": point.mu})

            rec = IterationRecord(
                k=k, mu_start=mu_start, mu=point.mu, c_inf=c_inf, fl_inf=fl_inf,
                fal_2=float(np.linalg.norm(fal)), delta=delta, j=targets.j, t=targets.t,
                T=targets.T, theta=theta, Theta=Theta, gamma_k=feas.gamma_k, eps_k=feas.eps_k,
                beta=feas.beta, alpha_cauchy=al.alpha, steering_active=steering_active,
                steering_cuts=cuts, red_qv_r=red_r, red_qv_s=reduction_qv(point, al.s_cauchy),
                v=point.v, red_model_s=red_s, red_model_cauchy=red_sc,
                clamp_active=curvature(point, s) < 0, used_cauchy=s is al.s_cauchy,
                qp_status=qp.status.value, L_before=point.L)
            if cfg.store_vectors:
                rec.x, rec.y, rec.s = point.x.copy(), point.y.copy(), s.copy()
                rec.r_cauchy, rec.s_cauchy = feas.r_cauchy.copy(), al.s_cauchy.copy()
            self.trace.append(rec)

            try:
                if self.line_search:
                    ls = line_search(point, s, red_s, cfg.eta_s, cfg.gamma_alpha,
                                     cfg.max_armijo_backtracks)
                    if ls is None:
                        self.nf += cfg.max_armijo_backtracks + 1
                        k += 1
                        return report(SolveStatus.EVALUATION_ERROR,
                                      "line search failed: model and function disagree")
                    self.nf += ls.evaluations
                    rec.alpha, rec.accepted, rec.L_after = ls.alpha, True, ls.L
                    delta = update_delta(delta, ls.alpha, cfg.ls_delta_grow, cfg.ls_delta_shrink)
                    x_new, f_new, c_new = ls.x, ls.f, ls.c
                else:
                    x_new = problem.project(point.x + s)
                    f_new, c_new = _eval_fc(problem, x_new)
                    self.nf += 1
                    L_new = _al_value(point.mu, f_new, c_new, point.y)
                    rho = (point.L - L_new) / red_s
                    rec.rho, rec.L_after = rho, L_new
                    if rho >= cfg.eta_s:
                        rec.accepted = True
                        if rho >= cfg.eta_vs and step_norm(s, norm) >= (1 - 1e-8) * Theta:
                            delta *= cfg.tr_delta_grow
                    else:
                        delta *= cfg.tr_delta_shrink

                if rec.accepted:
                    g_new = np.asarray(problem.eval_g(x_new), dtype=float)
                    if not np.all(np.isfinite(g_new)):
                        raise EvaluationError("non-finite gradient")
                    self.ng += 1
                    nxt = AlPoint(problem, x_new, point.y, point.mu, f_new, g_new, c_new)
                    y, mu, targets, rec.multiplier_update = update_multipliers_and_targets(
                        nxt, targets, cfg, self.adaptive)
                    point = nxt.with_y(y).with_mu(mu)
            except EvaluationError as exc:
                k += 1
                return report(SolveStatus.EVALUATION_ERROR, str(exc))
            rec.mu_after = point.mu
            k += 1


def solve(problem, config=None, x0=None, y0=None):
    """Run the configured method on ``problem``.

    Parameters
    ----------
    problem : Problem
    config : SolverConfig, optional
    x0, y0 : array_like, optional
        Starting point (projected onto the bounds) and multipliers, in the
        units of the original problem.  Default to ``problem.x0`` and zeros.

    Returns
    -------
    SolveReport
        ``x`` and ``y`` are in original units; norms and ``mu`` refer to the
        scaled problem the iteration actually saw.
    """
    cfg = config or SolverConfig()
    if x0 is None:
        x0 = problem.x0
    if x0 is None:
        raise ConfigurationError("no starting point given")
    x0 = problem.project(np.asarray(x0, dtype=float).reshape(problem.n))
    if y0 is None:
        y0 = problem.y0 if problem.y0 is not None else np.zeros(problem.m)
    y0 = np.asarray(y0, dtype=float).reshape(problem.m)

    work = problem
    if cfg.prescale:
        try:
            work = prescale(problem, cfg.G, x0)
        except EvaluationError as exc:
            return _failed_start(problem, cfg, x0, y0, str(exc))
        y0 = work.scale.scale_multipliers(y0)
    try:
        rep = _Solve(work, cfg).run(x0, y0)
    except EvaluationError as exc:
        return _failed_start(problem, cfg, x0, y0, str(exc))
    if work.scale is not None:
        rep.scale = work.scale
        rep.y = work.scale.unscale_multipliers(rep.y)
        rep.f = rep.f / work.scale.objective
    return rep


def solve_tr(problem, config=None, x0=None, y0=None):
    """:func:`solve` with the trust-region acceptance mechanism."""
    cfg = (config or SolverConfig()).replace(variant=Variant.TRUST_REGION)
    return solve(problem, cfg, x0, y0)


def _failed_start(problem, cfg, x0, y0, message):
    nan = float("nan")
    return SolveReport(SolveStatus.EVALUATION_ERROR, x0, y0, cfg.mu0, 0, 1, 0, nan, nan, nan,
                       nan, 0.0, cfg.variant, cfg.steering, message=message)
