"""Problem abstraction, bound projection and first-order stationarity measures.

Problems are posed as::

    minimize f(x)  subject to  c(x) = 0,  l <= x <= u

and only ever accessed through callbacks: objective, gradient, constraint
values, Jacobian-vector products (both directions) and Hessian-of-Lagrangian
vector products.  The Lagrangian is ``f(x) - c(x)^T y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConfigurationError",
    "DomainError",
    "EvaluationError",
    "InternalError",
    "Problem",
    "Residuals",
    "ScaleFactors",
    "project",
    "residual_FL",
    "residual_FFEAS",
    "residual_FAL",
    "al_gradient",
    "residuals",
    "prescale",
    "check_adjoint",
    "check_gradients",
]


class ConfigurationError(ValueError):
    """Inconsistent dimensions, parameters or names."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation (e.g. mu <= 0)."""


class EvaluationError(ArithmeticError):
    """A problem callback returned a non-finite value."""


class InternalError(RuntimeError):
    """An invariant guaranteed by the theory was violated.

    ``state`` carries whatever context the raiser had at hand, for the crash
    report.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state if state is not None else {}


def _vec(a, n=None, name="vector"):
    a = np.asarray(a, dtype=float).reshape(-1)
    if n is not None and a.shape[0] != n:
        raise ConfigurationError(f"{name} has length {a.shape[0]}, expected {n}")
    return a


@dataclass
class Problem:
    """Callback-defined nonlinear program.

    Parameters
    ----------
    n, m : int
        Number of variables and of equality constraints.
    eval_f : callable ``x -> float``
    eval_g : callable ``x -> (n,)``
        Gradient of the objective.
    eval_c : callable ``x -> (m,)``
    jacobian_apply : callable ``(x, v) -> (m,)``
        ``J(x) v``.
    jacobian_transpose_apply : callable ``(x, w) -> (n,)``
        ``J(x)^T w``.
    lagrangian_hessian_apply : callable ``(x, y, v) -> (n,)``
        ``(hess f(x) - sum_i y_i hess c_i(x)) v``.
    lower, upper : array_like, shape (n,)
        Bounds; use ``-inf``/``inf`` for absent bounds.
    x0, y0 : array_like, optional
        Default starting point and multipliers.
    """

    n: int
    m: int
    eval_f: Callable
    eval_g: Callable
    eval_c: Callable
    jacobian_apply: Callable
    jacobian_transpose_apply: Callable
    lagrangian_hessian_apply: Callable
    lower: np.ndarray = None
    upper: np.ndarray = None
    x0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    name: str = ""
    scale: Optional["ScaleFactors"] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n <= 0 or self.m < 0:
            raise ConfigurationError(f"bad dimensions n={self.n}, m={self.m}")
        self.lower = (np.full(self.n, -np.inf) if self.lower is None
                      else _vec(self.lower, self.n, "lower"))
        self.upper = (np.full(self.n, np.inf) if self.upper is None
                      else _vec(self.upper, self.n, "upper"))
        if np.any(self.lower > self.upper):
            raise ConfigurationError("lower bound exceeds upper bound")
        if self.x0 is not None:
            self.x0 = _vec(self.x0, self.n, "x0")
        if self.y0 is not None:
            self.y0 = _vec(self.y0, self.m, "y0")

    @classmethod
    def from_dense(cls, n, m, f, g, c, jac, hess_lag, **kwargs):
        """Build a problem from a dense Jacobian and Hessian of the Lagrangian.

        ``jac(x)`` returns an ``(m, n)`` array and ``hess_lag(x, y)`` an
        ``(n, n)`` array.  The matrices are only used through products.
        """

        def jprod(x, v):
            return np.asarray(jac(x), dtype=float).reshape(m, n) @ v

        def jtprod(x, w):
            return np.asarray(jac(x), dtype=float).reshape(m, n).T @ w

        def hprod(x, y, v):
            return np.asarray(hess_lag(x, y), dtype=float) @ v

        def cvec(x):
            return np.asarray(c(x), dtype=float).reshape(m)

        def gvec(x):
            return np.asarray(g(x), dtype=float).reshape(n)

        return cls(n, m, lambda x: float(f(x)), gvec, cvec, jprod, jtprod, hprod, **kwargs)

    def project(self, x):
        return project(x, self.lower, self.upper)


def project(x, l, u):
    """Euclidean projection onto the box ``[l, u]`` (componentwise clamp).

    Infinite bounds are no-ops.
    """
    x = np.asarray(x, dtype=float)
    l = np.asarray(l, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != l.shape or x.shape != u.shape:
        raise ConfigurationError(
            f"dimension mismatch: x {x.shape}, l {l.shape}, u {u.shape}")
    return np.minimum(np.maximum(x, l), u)


def residual_FL(problem, x, y, g=None):
    """``P(x - (g(x) - J(x)^T y)) - x``."""
    if g is None:
        g = problem.eval_g(x)
    grad_lag = g - problem.jacobian_transpose_apply(x, y) if problem.m else g
    return problem.project(x - grad_lag) - x


def residual_FFEAS(problem, x, c=None):
    """``P(x - J(x)^T c(x)) - x``, the projected gradient of ``0.5||c||^2``."""
    if problem.m == 0:
        return np.zeros(problem.n)
    if c is None:
        c = problem.eval_c(x)
    return problem.project(x - problem.jacobian_transpose_apply(x, c)) - x


def al_gradient(problem, x, y, mu, g=None, c=None):
    """Gradient of ``mu*(f - c^T y) + 0.5||c||^2``, i.e. ``mu*(g - J^T pi)``."""
    if mu <= 0:
        raise DomainError(f"penalty parameter must be positive, got {mu}")
    if g is None:
        g = problem.eval_g(x)
    if problem.m == 0:
        return mu * g
    if c is None:
        c = problem.eval_c(x)
    pi = y - c / mu
    return mu * (g - problem.jacobian_transpose_apply(x, pi))


def residual_FAL(problem, x, y, mu, g=None, c=None):
    """``P(x - grad_x L(x, y, mu)) - x``."""
    return problem.project(x - al_gradient(problem, x, y, mu, g, c)) - x


@dataclass
class Residuals:
    """The stationarity vectors at one iterate, with cached norms."""

    F_L: np.ndarray
    F_FEAS: np.ndarray
    F_AL: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        def norms(v):
            if v.size == 0:
                return 0.0, 0.0
            return float(np.max(np.abs(v))), float(np.linalg.norm(v))

        self.fl_inf, self.fl_2 = norms(self.F_L)
        self.ffeas_inf, self.ffeas_2 = norms(self.F_FEAS)
        self.fal_inf, self.fal_2 = norms(self.F_AL)
        self.c_inf, self.c_2 = norms(self.c)

    @property
    def c_norm(self):
        return self.c_2


def residuals(problem, x, y, mu, g=None, c=None):
    if g is None:
        g = problem.eval_g(x)
    if c is None:
        c = problem.eval_c(x) if problem.m else np.zeros(0)
    return Residuals(
        F_L=residual_FL(problem, x, y, g),
        F_FEAS=residual_FFEAS(problem, x, c),
        F_AL=residual_FAL(problem, x, y, mu, g, c),
        c=c,
    )


@dataclass(frozen=True)
class ScaleFactors:
    """Constant factors applied by :func:`prescale`.

    The scaled problem has objective ``objective * f`` and constraints
    ``constraints[i] * c_i``.
    """

    objective: float
    constraints: np.ndarray

    def unscale_multipliers(self, y_scaled):
        """Multipliers of the original problem from those of the scaled one."""
        return self.constraints * np.asarray(y_scaled) / self.objective

    def scale_multipliers(self, y):
        return self.objective * np.asarray(y) / self.constraints


def prescale(problem, G=1e2, x0=None):
    """Scale ``f`` and each ``c_i`` so their gradients at ``x0`` have
    infinity norm at most ``G``.

    The factor for a function whose initial gradient norm is ``h`` is
    ``min(1, G/h)``; functions with zero gradient keep factor 1.  Returns a
    new :class:`Problem` whose ``scale`` attribute records the factors.
    """
    if x0 is None:
        x0 = problem.x0
    if x0 is None:
        raise ConfigurationError("prescale needs an initial point")
    x0 = problem.project(_vec(x0, problem.n, "x0"))

    def factor(h):
        return 1.0 if h <= G else G / h

    sf = factor(np.max(np.abs(problem.eval_g(x0))))
    sc = np.ones(problem.m)
    for i in range(problem.m):
        e = np.zeros(problem.m)
        e[i] = 1.0
        sc[i] = factor(np.max(np.abs(problem.jacobian_transpose_apply(x0, e))))
    scale = ScaleFactors(sf, sc)

    # hess(sf*f - sum yt_i sc_i c_i) = sf * hess_lag(x, sc*yt/sf)
    def hprod(x, y, v):
        return sf * problem.lagrangian_hessian_apply(x, sc * y / sf, v)

    y0 = problem.y0
    if y0 is not None:
        y0 = scale.scale_multipliers(y0)
    return Problem(
        problem.n,
        problem.m,
        lambda x: sf * problem.eval_f(x),
        lambda x: sf * problem.eval_g(x),
        lambda x: sc * problem.eval_c(x),
        lambda x, v: sc * problem.jacobian_apply(x, v),
        lambda x, w: problem.jacobian_transpose_apply(x, sc * w),
        hprod,
        lower=problem.lower.copy(),
        upper=problem.upper.copy(),
        x0=x0,
        y0=y0,
        name=problem.name,
        scale=scale,
    )


def check_adjoint(problem, x, trials=100, rng=None):
    """Largest violation of ``<Jv, w> = <v, J^T w>`` relative to
    ``1 + ||v|| ||w||`` over random pairs."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    if problem.m == 0:
        return worst
    for _ in range(trials):
        v = rng.standard_normal(problem.n)
        w = rng.standard_normal(problem.m)
        lhs = problem.jacobian_apply(x, v) @ w
        rhs = v @ problem.jacobian_transpose_apply(x, w)
        worst = max(worst, abs(lhs - rhs) / (1.0 + np.linalg.norm(v) * np.linalg.norm(w)))
    return worst


def _fd_gradient(fun, x, h=1e-6):
    grad = np.empty_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (fun(x + e) - fun(x - e)) / (2 * step)
    return grad


def check_gradients(problem, x, y=None, mu=1.0, h=1e-6):
    """Relative central-difference errors of ``grad f`` and ``grad_x L``.

    Returns a dict with keys ``objective``, ``augmented_lagrangian`` and
    ``jacobian`` (the latter compares ``J^T w`` for a fixed ``w``).
    """
    x = np.asarray(x, dtype=float)
    y = np.zeros(problem.m) if y is None else np.asarray(y, dtype=float)

    def rel(a, b):
        return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))

    def al(z):
        c = problem.eval_c(z) if problem.m else np.zeros(0)
        return mu * (problem.eval_f(z) - c @ y) + 0.5 * c @ c

    out = {
        "objective": rel(problem.eval_g(x), _fd_gradient(problem.eval_f, x, h)),
        "augmented_lagrangian": rel(al_gradient(problem, x, y, mu), _fd_gradient(al, x, h)),
    }
    if problem.m:
        w = np.linspace(1.0, 2.0, problem.m)
        out["jacobian"] = rel(
            problem.jacobian_transpose_apply(x, w),
            _fd_gradient(lambda z: problem.eval_c(z) @ w, x, h),
        )

    def grad_lag(z):
        g = problem.eval_g(z)
        return g - problem.jacobian_transpose_apply(z, y) if problem.m else g

    v = np.linspace(-1.0, 1.0, problem.n) + 0.5
    t = h * max(1.0, float(np.linalg.norm(x)))
    fd = (grad_lag(x + t * v) - grad_lag(x - t * v)) / (2 * t)
    out["hessian"] = rel(problem.lagrangian_hessian_apply(x, y, v), fd)
    return out
