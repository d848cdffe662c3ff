"""Backtracking Cauchy steps along projected-gradient arcs.

``cauchy_feasibility`` works on the Gauss-Newton model of the constraint
violation; it also returns the radius inflation factor ``gamma_k`` and the
decrease ratio ``eps_k`` consumed by ``cauchy_al``.  Both accept the norm used
for the trust-region test: the solver uses ``inf`` (box trust regions), the
idealised statement uses ``2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .al_model import reduction_quadratic, reduction_qtilde, reduction_qv
from .nlp_core import DomainError, InternalError

__all__ = [
    "FeasCauchyResult",
    "AlCauchyResult",
    "cauchy_feasibility",
    "cauchy_al",
    "satisfies_c1",
    "satisfies_c2",
    "step_norm",
]

MAX_BACKTRACKS = 200


def step_norm(s, norm=2):
    if s.size == 0:
        return 0.0
    if norm == 2:
        # scaled so tiny steps do not underflow to a zero norm
        big = float(np.max(np.abs(s)))
        return big * float(np.linalg.norm(s / big)) if big > 0 else 0.0
    if norm in (np.inf, "inf"):
        return float(np.max(np.abs(s)))
    raise ValueError(f"unsupported norm {norm!r}")


@dataclass(frozen=True)
class FeasCauchyResult:
    beta: float
    r_cauchy: np.ndarray
    eps_k: float
    gamma_k: float
    l_k: int
    backtracks: int


@dataclass(frozen=True)
class AlCauchyResult:
    alpha: float
    s_cauchy: np.ndarray
    backtracks: int


def _reduction_fn(convexified):
    return reduction_qtilde if convexified else reduction_quadratic


def satisfies_c1(point, r, theta, eps_r=1e-4, norm=2, slack=0.0):
    """Sufficient decrease in the violation model plus the radius test."""
    slope = float(r @ point.jtc)
    red = reduction_qv(point, r)
    return red >= -eps_r * slope - slack and step_norm(r, norm) <= theta * (1 + slack)


def satisfies_c2(point, s, Theta, eps_k, eps_r=1e-4, norm=2, convexified=True, slack=0.0):
    """Sufficient decrease in the AL model plus the radius test."""
    slope = float(s @ point.grad_L)
    red = _reduction_fn(convexified)(point, s)
    return (red >= -0.5 * (eps_k + eps_r) * slope - slack
            and step_norm(s, norm) <= Theta * (1 + slack))


def cauchy_feasibility(point, theta, eps_r=1e-4, gamma=0.5, norm=2,
                       max_backtracks=MAX_BACKTRACKS):
    """Cauchy step for the feasibility subproblem.

    Parameters
    ----------
    point : AlPoint
        Only ``x``, ``c`` and Jacobian products are used.
    theta : float
        Trust-region radius, ``>= 0``.

    Returns
    -------
    FeasCauchyResult
    """
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    x = point.x
    if theta == 0:
        # only the zero step fits; matches the l_k = 0 outcome when F_FEAS = 0
        return FeasCauchyResult(1.0, np.zeros_like(x), 0.0, 2.0, 0, 0)
    d = point.jtc
    project = point.problem.project

    def arc(t):
        return project(x - t * d) - x

    # smallest l with ||P(x - gamma^l J^T c) - x|| <= theta; terminates because
    # gamma^l underflows to 0 at the latest
    l_k, t = 0, 1.0
    r = arc(t)
    prev_norm = None
    while step_norm(r, norm) > theta:
        prev_norm = step_norm(r, norm)
        l_k += 1
        t *= gamma
        r = arc(t)
    if l_k == 0:
        gamma_k = 2.0
    else:
        gamma_k = min(2.0, 0.5 * (1.0 + prev_norm / theta))

    beta, eps_k, backtracks = t, 0.0, 0
    while True:
        slope = float(r @ d)
        red = reduction_qv(point, r)
        if red >= -eps_r * slope:
            break
        if slope > 0:
            raise InternalError("projected arc is not a descent direction for v",
                                {"slope": slope, "beta": beta, "x": x})
        if slope < 0:
            eps_k = max(eps_k, -red / slope)
        backtracks += 1
        if backtracks > max_backtracks:
            raise InternalError("feasibility Cauchy backtracking did not terminate",
                                {"beta": beta, "theta": theta, "x": x})
        beta *= gamma
        r = arc(beta)
    return FeasCauchyResult(beta, r, eps_k, gamma_k, l_k, backtracks)


def cauchy_al(point, Theta, eps_k, eps_r=1e-4, gamma=0.5, norm=2, convexified=True,
              max_backtracks=MAX_BACKTRACKS):
    """Cauchy step for the AL subproblem.

    ``convexified`` selects the model whose reduction enters the decrease
    test: the clamped model for line-search methods, the plain quadratic for
    trust-region methods.
    """
    if Theta < 0:
        raise DomainError(f"Theta must be nonnegative, got {Theta}")
    if eps_k < 0:
        raise DomainError(f"eps_k must be nonnegative, got {eps_k}")
    n = point.problem.n
    if Theta == 0:
        return AlCauchyResult(1.0, np.zeros(n), 0)
    x = point.x
    d = point.grad_L
    project = point.problem.project
    reduction = _reduction_fn(convexified)
    factor = 0.5 * (eps_k + eps_r)

    alpha, backtracks = 1.0, 0
    s = project(x - d) - x
    # radius-only cuts are not counted against the cap: they stop by underflow
    while step_norm(s, norm) > Theta:
        alpha *= gamma
        s = project(x - alpha * d) - x
    while reduction(point, s) < -factor * float(s @ d):
        backtracks += 1
        if backtracks > max_backtracks:
            raise InternalError("AL Cauchy backtracking did not terminate",
                                {"alpha": alpha, "Theta": Theta, "x": x, "mu": point.mu})
        alpha *= gamma
        s = project(x - alpha * d) - x
    return AlCauchyResult(alpha, s, backtracks)
