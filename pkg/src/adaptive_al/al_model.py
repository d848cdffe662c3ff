"""Augmented Lagrangian evaluation and local models of it.

Two scalings are used.  The line-search/trust-region machinery scales the
Lagrangian by the penalty parameter::

    L(x, y, mu) = mu * (f - c^T y) + 0.5 * ||c||^2

while the LANCELOT-style models (``qhat`` and ``qN``) put ``1/mu`` on the
penalty term, ``l + ||c||^2 / (2 mu)``.  The two are related by a factor
``mu``; comparisons are only ever made within one convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .nlp_core import DomainError, EvaluationError

__all__ = [
    "AlPoint",
    "ModelKind",
    "ModelEval",
    "pi",
    "curvature",
    "eval_qv",
    "reduction_qv",
    "eval_qtilde",
    "reduction_qtilde",
    "reduction_quadratic",
    "eval_qhat",
    "eval_qN",
    "evaluate_model",
    "al_hessian_operator",
    "model_convergence_gap",
]


def pi(c_x, y, mu):
    """First-order multiplier estimate ``y - c/mu``."""
    if mu <= 0:
        raise DomainError(f"penalty parameter must be positive, got {mu}")
    return np.asarray(y, dtype=float) - np.asarray(c_x, dtype=float) / mu


def _finite(name, value):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"non-finite {name}")
    return value


@dataclass
class AlPoint:
    """A primal-dual point with penalty parameter and cached function values."""

    problem: object
    x: np.ndarray
    y: np.ndarray
    mu: float
    f: float
    g: np.ndarray
    c: np.ndarray

    @classmethod
    def at(cls, problem, x, y, mu):
        if mu <= 0:
            raise DomainError(f"penalty parameter must be positive, got {mu}")
        x = np.asarray(x, dtype=float)
        f = _finite("objective", float(problem.eval_f(x)))
        g = _finite("gradient", np.asarray(problem.eval_g(x), dtype=float))
        c = (_finite("constraints", np.asarray(problem.eval_c(x), dtype=float))
             if problem.m else np.zeros(0))
        return cls(problem, x, np.asarray(y, dtype=float), float(mu), f, g, c)

    def with_mu(self, mu):
        if mu <= 0:
            raise DomainError(f"penalty parameter must be positive, got {mu}")
        return AlPoint(self.problem, self.x, self.y, float(mu), self.f, self.g, self.c)

    def with_y(self, y):
        return AlPoint(self.problem, self.x, np.asarray(y, dtype=float), self.mu,
                       self.f, self.g, self.c)

    @property
    def v(self):
        return 0.5 * float(self.c @ self.c)

    @property
    def lagrangian(self):
        return self.f - float(self.c @ self.y)

    @property
    def L(self):
        return self.mu * self.lagrangian + self.v

    @property
    def pi(self):
        return pi(self.c, self.y, self.mu)

    def jprod(self, s):
        if self.problem.m == 0:
            return np.zeros(0)
        return self.problem.jacobian_apply(self.x, s)

    def jtprod(self, w):
        if self.problem.m == 0:
            return np.zeros(self.problem.n)
        return self.problem.jacobian_transpose_apply(self.x, w)

    @property
    def jtc(self):
        """``J^T c``, the gradient of the violation measure."""
        try:
            return self._jtc
        except AttributeError:
            self._jtc = self.jtprod(self.c)
            return self._jtc

    @property
    def grad_L(self):
        try:
            return self._grad_L
        except AttributeError:
            self._grad_L = self.mu * (self.g - self.jtprod(self.y)) + self.jtc
            return self._grad_L

    def hprod(self, s, y=None):
        return self.problem.lagrangian_hessian_apply(self.x, self.y if y is None else y, s)


class ModelKind(enum.Enum):
    GAUSS_NEWTON_VIOLATION = "qv"
    CONVEXIFIED_AL = "qtilde"
    QUADRATIC_AL = "q"
    LANCELOT_HAT = "qhat"
    LANCELOT_NEWTON = "qN"


@dataclass(frozen=True)
class ModelEval:
    kind: ModelKind
    value: float
    reduction: float


def eval_qv(point, s):
    """``0.5 ||c + J s||^2``."""
    r = point.c + point.jprod(s)
    return 0.5 * float(r @ r)


def reduction_qv(point, s):
    if point.problem.m == 0:
        return 0.0
    return point.v - eval_qv(point, s)


def curvature(point, s):
    """``s^T (mu H + J^T J) s`` with one Hessian and one Jacobian product."""
    js = point.jprod(s)
    return point.mu * float(s @ point.hprod(s)) + float(js @ js)


def reduction_quadratic(point, s):
    """Reduction in the unconvexified second-order model of ``L``."""
    return -float(point.grad_L @ s) - 0.5 * curvature(point, s)


def reduction_qtilde(point, s):
    """Reduction in the convexified model: the curvature term is clamped at 0."""
    return -float(point.grad_L @ s) - max(0.5 * curvature(point, s), 0.0)


def eval_qtilde(point, s):
    return point.L - reduction_qtilde(point, s)


def _shifted_multiplier(point):
    # LANCELOT writes y + c/mu with the sign convention f + c^T y; with
    # l = f - c^T y the same shift is pi = y - c/mu.
    return point.pi


def eval_qhat(point, s):
    """LANCELOT-convention model with the Hessian taken at ``y``.

    ``mu * qhat(s)`` equals ``grad_L^T s + 0.5 s^T (mu H(y) + J^T J) s``,
    the unconvexified model of ``L`` without its constant term.
    """
    mu = point.mu
    w = _shifted_multiplier(point)
    grad = point.g - point.jtprod(w)
    js = point.jprod(s)
    return float(grad @ s) + 0.5 * (float(s @ point.hprod(s)) + float(js @ js) / mu)


def eval_qN(point, s):
    """Newton model: as :func:`eval_qhat` but with the Hessian at the shifted multiplier."""
    mu = point.mu
    w = _shifted_multiplier(point)
    grad = point.g - point.jtprod(w)
    js = point.jprod(s)
    return float(grad @ s) + 0.5 * (float(s @ point.hprod(s, w)) + float(js @ js) / mu)


def evaluate_model(kind, point, s):
    s = np.asarray(s, dtype=float)
    if kind is ModelKind.GAUSS_NEWTON_VIOLATION:
        value = eval_qv(point, s)
        return ModelEval(kind, value, point.v - value)
    if kind is ModelKind.CONVEXIFIED_AL:
        red = reduction_qtilde(point, s)
        return ModelEval(kind, point.L - red, red)
    if kind is ModelKind.QUADRATIC_AL:
        red = reduction_quadratic(point, s)
        return ModelEval(kind, point.L - red, red)
    if kind is ModelKind.LANCELOT_HAT:
        value = eval_qhat(point, s)
        return ModelEval(kind, value, -value)
    if kind is ModelKind.LANCELOT_NEWTON:
        value = eval_qN(point, s)
        return ModelEval(kind, value, -value)
    raise ValueError(kind)


def al_hessian_operator(point):
    """``v -> (mu H + J^T J) v``."""

    def apply(v):
        return point.mu * point.hprod(v) + point.jtprod(point.jprod(v))

    return apply


def model_convergence_gap(point, theta, n_dirs=100, rng=0):
    """Sampled ``max |qtilde(s) - qv(s)|`` over ``||s||_2 <= 2 theta``.

    Samples ``s = 0`` and ``n_dirs`` random unit directions at radii
    ``theta/2, theta, 2 theta``.  The same seed gives the same directions, so
    gaps at different ``mu`` are comparable.
    """
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    gap = abs(eval_qtilde(point, np.zeros(point.problem.n)) - point.v)
    if theta == 0:
        return gap
    rng = np.random.default_rng(rng)
    dirs = rng.standard_normal((n_dirs, point.problem.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for d in dirs:
        for radius in (0.5 * theta, theta, 2.0 * theta):
            s = radius * d
            gap = max(gap, abs(eval_qtilde(point, s) - eval_qv(point, s)))
    return gap
