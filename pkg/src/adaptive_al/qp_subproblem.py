"""Box-constrained quadratic subproblems by projected CG with a working set.

Solves (approximately)::

    minimize  b^T s + 0.5 s^T H s   subject to  lower <= s <= upper

where ``H`` is available only through products.  With an infinity-norm trust
region the radius is just another pair of bounds, so the subproblems of the
outer solver all have this form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .nlp_core import ConfigurationError

__all__ = ["QpStatus", "QpSpec", "QpResult", "solve_bound_qp", "sanity_check_step"]

MULTIPLIER_TOL = -1e-10


class QpStatus(str, enum.Enum):
    CONVERGED = "converged"
    NEGATIVE_CURVATURE = "negative_curvature"
    ITERATION_CAP = "iteration_cap"


@dataclass
class QpSpec:
    """Quadratic ``b^T s + 0.5 s^T H s`` over a box containing 0 and ``start``."""

    apply: Callable
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    start: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.start = np.asarray(self.start, dtype=float)
        if np.any(self.lower > 0) or np.any(self.upper < 0):
            raise ConfigurationError("box must contain the origin")
        scale = 1e-12 * (1.0 + np.abs(self.start))
        if np.any(self.start < self.lower - scale) or np.any(self.start > self.upper + scale):
            raise ConfigurationError("start point lies outside the box")
        self.start = np.clip(self.start, self.lower, self.upper)

    @classmethod
    def trust_region(cls, apply, b, x, l, u, radius, start):
        """Box ``[max(l - x, -radius), min(u - x, radius)]``."""
        lower = np.maximum(np.asarray(l) - x, -radius)
        upper = np.minimum(np.asarray(u) - x, radius)
        # x sits on or inside its bounds, so rounding can only push these past 0
        return cls(apply, b, np.minimum(lower, 0.0), np.maximum(upper, 0.0), start)

    def value(self, s):
        return float(self.b @ s) + 0.5 * float(s @ self.apply(s))


@dataclass
class QpResult:
    step: np.ndarray
    status: QpStatus
    cg_iterations: int
    working_set_restarts: int


def _max_step(s, p, lower, upper, free):
    """Largest ``t`` keeping ``s + t p`` in the box, and the blocking index."""
    t_best, idx = np.inf, -1
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lo = np.where(free & (p < 0), (lower - s) / p, np.inf)
        t_up = np.where(free & (p > 0), (upper - s) / p, np.inf)
    t = np.minimum(t_lo, t_up)
    if t.size:
        idx = int(np.argmin(t))
        t_best = max(float(t[idx]), 0.0)
    return t_best, idx


def solve_bound_qp(spec, tol=None, max_cg=None, max_restarts=None,
                   multiplier_tol=MULTIPLIER_TOL):
    """Projected conjugate gradients with working-set updates.

    Starting from ``spec.start`` (normally a Cauchy step), the bounds active
    there form the working set.  CG runs on the free variables.  A CG step
    that would cross a bound stops on it, the bound joins the working set and
    CG restarts.  When the reduced gradient is below tolerance the working-set
    multipliers are checked; the most negative one (below
    ``multiplier_tol``) is released and CG restarts.  Nonpositive curvature
    ends the solve at the box boundary along the current direction.

    Parameters
    ----------
    tol : float, optional
        Absolute tolerance on the reduced gradient.  By default each CG run
        uses ``max(min(0.1, sqrt(r0)) * r0, 1e-10)`` with ``r0`` the norm of
        the reduced gradient at its start.
    max_cg, max_restarts : int, optional
        Caps on total CG iterations (default ``20 n``) and on working-set
        restarts (default ``5 n``).
    """
    n = spec.b.size
    lower, upper = spec.lower, spec.upper
    max_cg = 20 * n if max_cg is None else max_cg
    max_restarts = 5 * n if max_restarts is None else max_restarts

    s = spec.start.copy()
    fixed = lower >= upper
    side = np.zeros(n, dtype=int)
    side[s <= lower] = -1
    side[(s >= upper) & (side == 0)] = 1
    side[fixed] = -1

    cg_iters, restarts = 0, 0

    def result(status):
        return QpResult(np.clip(s, lower, upper), status, cg_iters, restarts)

    while True:
        free = side == 0
        grad = spec.b + spec.apply(s)
        r = np.where(free, -grad, 0.0)
        r0 = float(np.linalg.norm(r))
        run_tol = tol if tol is not None else max(min(0.1, np.sqrt(r0)) * r0, 1e-10)

        blocked = False
        if r0 > run_tol:
            p = r.copy()
            rr = r0 * r0
            while True:
                if cg_iters >= max_cg:
                    return result(QpStatus.ITERATION_CAP)
                hp = np.where(free, spec.apply(p), 0.0)
                cg_iters += 1
                curv = float(p @ hp)
                t_max, idx = _max_step(s, p, lower, upper, free)
                if curv <= 1e-14 * float(p @ p):
                    if np.isfinite(t_max):
                        s = s + t_max * p
                    return result(QpStatus.NEGATIVE_CURVATURE)
                a = rr / curv
                if a > t_max:
                    s = s + t_max * p
                    s[idx] = lower[idx] if p[idx] < 0 else upper[idx]
                    side[idx] = -1 if p[idx] < 0 else 1
                    blocked = True
                    break
                s = s + a * p
                r = r - a * hp
                rr_new = float(r @ r)
                if np.sqrt(rr_new) <= run_tol:
                    break
                p = r + (rr_new / rr) * p
                rr = rr_new

        if blocked:
            restarts += 1
            if restarts > max_restarts:
                return result(QpStatus.ITERATION_CAP)
            continue

        # reduced problem solved: multipliers of the working-set bounds
        grad = spec.b + spec.apply(s)
        lam = np.where(side == -1, grad, np.where(side == 1, -grad, np.inf))
        lam[fixed] = np.inf
        i = int(np.argmin(lam)) if n else -1
        if n == 0 or lam[i] >= multiplier_tol:
            return result(QpStatus.CONVERGED)
        side[i] = 0
        restarts += 1
        if restarts > max_restarts:
            return result(QpStatus.ITERATION_CAP)


def sanity_check_step(candidate, cauchy, reduction):
    """Keep whichever step reduces the model more; ties keep ``candidate``.

    ``reduction`` maps a step to its model reduction.
    """
    if reduction(candidate) >= reduction(cauchy):
        return candidate
    return cauchy
