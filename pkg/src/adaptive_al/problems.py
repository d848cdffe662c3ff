"""Small hand-coded test problems with known solutions.

Each entry carries either a reference solution (``x_star`` and, when it is
unique, ``y_star``) or an infeasibility tag with the minimal violation
``v_star``.  :func:`certify` re-checks those references with finite
differences, independently of the analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .nlp_core import ConfigurationError, Problem

__all__ = ["SuiteProblem", "builtin_problems", "get_problem", "certify", "project_simplex"]


@dataclass
class SuiteProblem:
    problem: Problem
    x_star: Optional[tuple] = None
    y_star: Optional[np.ndarray] = None
    infeasible: bool = False
    v_star: Optional[float] = None
    tags: frozenset = field(default_factory=frozenset)

    @property
    def name(self):
        return self.problem.name

    def solutions(self):
        """Reference minimizers as a list of arrays (some problems have several)."""
        return [np.asarray(x, dtype=float) for x in (self.x_star or ())]


def _dense(name, n, m, f, g, c, jac, hess_lag, x0, lower=None, upper=None):
    if m == 0:
        return Problem(n, 0, lambda x: float(f(x)), lambda x: np.asarray(g(x), dtype=float),
                       lambda x: np.zeros(0), lambda x, v: np.zeros(0),
                       lambda x, w: np.zeros(n),
                       lambda x, y, v: np.asarray(hess_lag(x, y), dtype=float) @ v,
                       lower=lower, upper=upper, x0=x0, name=name)
    return Problem.from_dense(n, m, f, g, c, jac, hess_lag, lower=lower, upper=upper,
                              x0=x0, name=name)


def _lin_eq_quadratic():
    p = _dense(
        "lin_eq_quadratic", 2, 1,
        lambda x: x @ x, lambda x: 2 * x,
        lambda x: [x[0] + x[1] - 1], lambda x: [[1.0, 1.0]],
        lambda x, y: 2 * np.eye(2), x0=[0.0, 0.0])
    return SuiteProblem(p, ([0.5, 0.5],), np.array([1.0]), tags=frozenset({"analytic"}))


def _inconsistent_pair():
    p = _dense(
        "inconsistent_pair", 1, 2,
        lambda x: 0.0, lambda x: np.zeros(1),
        lambda x: [x[0] - 1, x[0] + 1], lambda x: [[1.0], [1.0]],
        lambda x, y: np.zeros((1, 1)), x0=[0.0])
    return SuiteProblem(p, ([0.0],), infeasible=True, v_star=1.0,
                        tags=frozenset({"analytic", "infeasible"}))


def _bound_kkt_2d():
    p = _dense(
        "bound_kkt_2d", 2, 1,
        lambda x: (x[0] - 2) ** 2 + x[1] ** 2,
        lambda x: [2 * (x[0] - 2), 2 * x[1]],
        lambda x: [x[0] - x[1]], lambda x: [[1.0, -1.0]],
        lambda x, y: 2 * np.eye(2), x0=[0.5, 0.0], lower=[0.0, 0.0], upper=[1.0, 1.0])
    return SuiteProblem(p, ([1.0, 1.0],), np.array([-2.0]),
                        tags=frozenset({"analytic", "bounds"}))


def _hs6():
    def hess(x, y):
        return np.diag([2.0 + 20.0 * y[0], 0.0])

    p = _dense(
        "hs6", 2, 1,
        lambda x: (1 - x[0]) ** 2, lambda x: [-2 * (1 - x[0]), 0.0],
        lambda x: [10 * (x[1] - x[0] ** 2)], lambda x: [[-20 * x[0], 10.0]],
        hess, x0=[-1.2, 1.0])
    return SuiteProblem(p, ([1.0, 1.0],), np.array([0.0]))


def _hs7():
    def grad(x):
        return [2 * x[0] / (1 + x[0] ** 2), -1.0]

    def cons(x):
        return [(1 + x[0] ** 2) ** 2 + x[1] ** 2 - 4]

    def jac(x):
        return [[4 * x[0] * (1 + x[0] ** 2), 2 * x[1]]]

    def hess(x, y):
        a = 1 + x[0] ** 2
        h11 = (2 - 2 * x[0] ** 2) / a ** 2 - y[0] * (4 + 12 * x[0] ** 2)
        return np.diag([h11, -2 * y[0]])

    p = _dense("hs7", 2, 1, lambda x: np.log(1 + x[0] ** 2) - x[1], grad, cons, jac, hess,
               x0=[2.0, 2.0])
    return SuiteProblem(p, ([0.0, np.sqrt(3.0)],), np.array([-1 / (2 * np.sqrt(3.0))]))


def _hs8():
    def hess(x, y):
        return -y[0] * 2 * np.eye(2) - y[1] * np.array([[0.0, 1.0], [1.0, 0.0]])

    p = _dense(
        "hs8", 2, 2,
        lambda x: -1.0, lambda x: np.zeros(2),
        lambda x: [x[0] ** 2 + x[1] ** 2 - 25, x[0] * x[1] - 9],
        lambda x: [[2 * x[0], 2 * x[1]], [x[1], x[0]]],
        hess, x0=[2.0, 1.0])
    a, b = np.sqrt(43.0), np.sqrt(7.0)
    return SuiteProblem(p, ([(a + b) / 2, (a - b) / 2],), np.zeros(2),
                        tags=frozenset({"square"}))


def _hs26():
    def grad(x):
        d1, d2 = x[0] - x[1], x[1] - x[2]
        return [2 * d1, -2 * d1 + 4 * d2 ** 3, -4 * d2 ** 3]

    def hess(x, y):
        q = 12 * (x[1] - x[2]) ** 2
        hf = np.array([[2.0, -2.0, 0.0], [-2.0, 2.0 + q, -q], [0.0, -q, q]])
        hc = np.array([[0.0, 2 * x[1], 0.0], [2 * x[1], 2 * x[0], 0.0],
                       [0.0, 0.0, 12 * x[2] ** 2]])
        return hf - y[0] * hc

    p = _dense(
        "hs26", 3, 1,
        lambda x: (x[0] - x[1]) ** 2 + (x[1] - x[2]) ** 4, grad,
        lambda x: [(1 + x[1] ** 2) * x[0] + x[2] ** 4 - 3],
        lambda x: [[1 + x[1] ** 2, 2 * x[0] * x[1], 4 * x[2] ** 3]],
        hess, x0=[-2.6, 2.0, 2.0])
    # quartic at the solution: a 1e-5 gradient only fixes x to about 1e-2
    return SuiteProblem(p, ([1.0, 1.0, 1.0],), np.array([0.0]), tags=frozenset({"degenerate"}))


def _hs27():
    def grad(x):
        r = x[1] - x[0] ** 2
        return [0.02 * (x[0] - 1) - 4 * x[0] * r, 2 * r, 0.0]

    def hess(x, y):
        hf = np.array([[0.02 - 4 * x[1] + 12 * x[0] ** 2, -4 * x[0], 0.0],
                       [-4 * x[0], 2.0, 0.0], [0.0, 0.0, 0.0]])
        return hf - y[0] * np.diag([0.0, 0.0, 2.0])

    p = _dense(
        "hs27", 3, 1,
        lambda x: 0.01 * (x[0] - 1) ** 2 + (x[1] - x[0] ** 2) ** 2, grad,
        lambda x: [x[0] + x[2] ** 2 + 1], lambda x: [[1.0, 0.0, 2 * x[2]]],
        hess, x0=[2.0, 2.0, 2.0])
    return SuiteProblem(p, ([-1.0, 1.0, 0.0],), np.array([-0.04]))


def _hs28():
    def grad(x):
        a, b = x[0] + x[1], x[1] + x[2]
        return [2 * a, 2 * a + 2 * b, 2 * b]

    hf = np.array([[2.0, 2.0, 0.0], [2.0, 4.0, 2.0], [0.0, 2.0, 2.0]])
    p = _dense(
        "hs28", 3, 1,
        lambda x: (x[0] + x[1]) ** 2 + (x[1] + x[2]) ** 2, grad,
        lambda x: [x[0] + 2 * x[1] + 3 * x[2] - 1], lambda x: [[1.0, 2.0, 3.0]],
        lambda x, y: hf, x0=[-4.0, 1.0, 1.0])
    return SuiteProblem(p, ([0.5, -0.5, 0.5],), np.array([0.0]))


def _hs39():
    def cons(x):
        return [x[1] - x[0] ** 3 - x[2] ** 2, x[0] ** 2 - x[1] - x[3] ** 2]

    def jac(x):
        return [[-3 * x[0] ** 2, 1.0, -2 * x[2], 0.0], [2 * x[0], -1.0, 0.0, -2 * x[3]]]

    def hess(x, y):
        return -y[0] * np.diag([-6 * x[0], 0.0, -2.0, 0.0]) - y[1] * np.diag([2.0, 0.0, 0.0, -2.0])

    p = _dense("hs39", 4, 2, lambda x: -x[0], lambda x: [-1.0, 0.0, 0.0, 0.0], cons, jac,
               hess, x0=[2.0, 2.0, 2.0, 2.0])
    return SuiteProblem(p, ([1.0, 1.0, 0.0, 0.0],), np.array([1.0, 1.0]))


def _hs48():
    def grad(x):
        return [2 * (x[0] - 1), 2 * (x[1] - x[2]), -2 * (x[1] - x[2]),
                2 * (x[3] - x[4]), -2 * (x[3] - x[4])]

    hf = np.zeros((5, 5))
    hf[0, 0] = 2.0
    hf[1:3, 1:3] = [[2.0, -2.0], [-2.0, 2.0]]
    hf[3:5, 3:5] = [[2.0, -2.0], [-2.0, 2.0]]
    a = np.array([[1.0, 1.0, 1.0, 1.0, 1.0], [0.0, 0.0, 1.0, -2.0, -2.0]])
    p = _dense(
        "hs48", 5, 2,
        lambda x: (x[0] - 1) ** 2 + (x[1] - x[2]) ** 2 + (x[3] - x[4]) ** 2, grad,
        lambda x: a @ x - np.array([5.0, -3.0]), lambda x: a,
        lambda x, y: hf, x0=[3.0, 5.0, -3.0, 2.0, -2.0])
    return SuiteProblem(p, (np.ones(5),), np.zeros(2))


def _rosenbrock_eq():
    def grad(x):
        r = x[1] - x[0] ** 2
        return [-400 * x[0] * r - 2 * (1 - x[0]), 200 * r]

    def hess(x, y):
        hf = np.array([[1200 * x[0] ** 2 - 400 * x[1] + 2, -400 * x[0]],
                       [-400 * x[0], 200.0]])
        return hf - y[0] * 2 * np.eye(2)

    p = _dense(
        "rosenbrock_eq", 2, 1,
        lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2, grad,
        lambda x: [x[0] ** 2 + x[1] ** 2 - 2], lambda x: [[2 * x[0], 2 * x[1]]],
        hess, x0=[-1.2, 1.0])
    # a second strict local minimizer on the circle, near (-1, 1), with y = 0.66642315292
    return SuiteProblem(p, ([1.0, 1.0], [-0.9977703369298444, 1.0022247027203555]))


def _bound_only():
    p = _dense(
        "bound_only", 2, 0,
        lambda x: (x[0] - 3) ** 2 + (x[1] + 1) ** 2,
        lambda x: [2 * (x[0] - 3), 2 * (x[1] + 1)],
        None, None, lambda x, y: 2 * np.eye(2),
        x0=[1.0, 1.0], lower=[0.0, 0.0], upper=[2.0, 2.0])
    return SuiteProblem(p, ([2.0, 0.0],), np.zeros(0), tags=frozenset({"bounds", "unconstrained"}))


def _quad_eq_n10():
    rng = np.random.default_rng(20120)
    n, m = 10, 3
    mat = rng.standard_normal((n, n))
    q_mat = mat.T @ mat / n + np.eye(n)
    q_vec = rng.standard_normal(n)
    a = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    kkt = np.block([[q_mat, -a.T], [a, np.zeros((m, m))]])
    sol = np.linalg.solve(kkt, np.concatenate([-q_vec, b]))
    p = _dense(
        "quad_eq_n10", n, m,
        lambda x: 0.5 * x @ q_mat @ x + q_vec @ x, lambda x: q_mat @ x + q_vec,
        lambda x: a @ x - b, lambda x: a, lambda x, y: q_mat, x0=np.zeros(n))
    return SuiteProblem(p, (sol[:n],), sol[n:])


def _maratos():
    p = _dense(
        "maratos", 2, 1,
        lambda x: 2 * (x @ x - 1) - x[0], lambda x: [4 * x[0] - 1, 4 * x[1]],
        lambda x: [x @ x - 1], lambda x: [[2 * x[0], 2 * x[1]]],
        lambda x, y: (4 - 2 * y[0]) * np.eye(2), x0=[0.8, 0.6])
    return SuiteProblem(p, ([1.0, 0.0],), np.array([1.5]))


def _nonconvex_clamp():
    # negative curvature along the constraint: the convexified model clamps;
    # unequal weights keep iterates off the symmetric maximizer
    p = _dense(
        "nonconvex_clamp", 2, 1,
        lambda x: -x[0] ** 2 - 2 * x[1] ** 2, lambda x: [-2 * x[0], -4 * x[1]],
        lambda x: [x[0] + x[1] - 1], lambda x: [[1.0, 1.0]],
        lambda x, y: np.diag([-2.0, -4.0]), x0=[0.7, 0.1], lower=[0.0, 0.0], upper=[1.0, 1.0])
    return SuiteProblem(p, ([1.0, 0.0], [0.0, 1.0]), tags=frozenset({"bounds", "nonconvex"}))


def project_simplex(a):
    """Euclidean projection onto the unit simplex by sorting.

    Returns the projection and the threshold ``tau`` with ``x = max(a - tau, 0)``.
    """
    a = np.asarray(a, dtype=float)
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, a.size + 1)
    rho = int(np.nonzero(u - css / k > 0)[0][-1])
    tau = css[rho] / (rho + 1)
    return np.maximum(a - tau, 0.0), tau


def _simplex_projection():
    a = np.array([0.9, 0.5, -0.2, 0.1, 0.3])
    x_star, tau = project_simplex(a)
    p = _dense(
        "simplex_projection", 5, 1,
        lambda x: 0.5 * (x - a) @ (x - a), lambda x: x - a,
        lambda x: [x.sum() - 1], lambda x: np.ones((1, 5)),
        lambda x, y: np.eye(5), x0=np.full(5, 0.2), lower=np.zeros(5))
    return SuiteProblem(p, (x_star,), np.array([-tau]), tags=frozenset({"bounds"}))


def _square_linear():
    a = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    b = np.array([1.0, -2.0, 3.0])
    x_star = np.linalg.solve(a, b)
    y_star = np.linalg.solve(a.T, x_star)
    p = _dense(
        "square_linear", 3, 3,
        lambda x: 0.5 * x @ x, lambda x: x, lambda x: a @ x - b, lambda x: a,
        lambda x, y: np.eye(3), x0=np.zeros(3))
    return SuiteProblem(p, (x_star,), y_star, tags=frozenset({"square"}))


def _infeasible_quadratic():
    p = _dense(
        "infeasible_quadratic", 2, 1,
        lambda x: (x[1] - 1) ** 2, lambda x: [0.0, 2 * (x[1] - 1)],
        lambda x: [x[0] ** 2 + 1], lambda x: [[2 * x[0], 0.0]],
        lambda x, y: np.diag([-2 * y[0], 2.0]), x0=[1.0, 0.0])
    return SuiteProblem(p, ([0.0, 1.0],), infeasible=True, v_star=0.5,
                        tags=frozenset({"infeasible"}))


def _hs21_slack():
    # 10 x1 - x2 - 10 >= 0 rewritten with a nonnegative slack x3
    p = _dense(
        "hs21_slack", 3, 1,
        lambda x: 0.01 * x[0] ** 2 + x[1] ** 2 - 100, lambda x: [0.02 * x[0], 2 * x[1], 0.0],
        lambda x: [10 * x[0] - x[1] - 10 - x[2]], lambda x: [[10.0, -1.0, -1.0]],
        lambda x, y: np.diag([0.02, 2.0, 0.0]), x0=[-1.0, -1.0, 0.0],
        lower=[2.0, -50.0, 0.0], upper=[50.0, 50.0, np.inf])
    return SuiteProblem(p, ([2.0, 0.0, 10.0],), np.array([0.0]),
                        tags=frozenset({"bounds", "slack"}))


_BUILDERS = (
    _lin_eq_quadratic, _inconsistent_pair, _bound_kkt_2d, _hs6, _hs7, _hs8, _hs26, _hs27,
    _hs28, _hs39, _hs48, _rosenbrock_eq, _bound_only, _quad_eq_n10, _maratos,
    _nonconvex_clamp, _simplex_projection, _square_linear, _infeasible_quadratic, _hs21_slack,
)


def builtin_problems():
    """Fresh registry ``name -> SuiteProblem`` in a fixed order."""
    entries = [build() for build in _BUILDERS]
    return {e.name: e for e in entries}


def get_problem(name):
    registry = builtin_problems()
    if name not in registry:
        raise ConfigurationError(f"unknown problem {name!r}")
    return registry[name]


def _fd_grad(fun, x, h=1e-7):
    out = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h * max(1.0, abs(x[i]))
        out[i] = (fun(x + e) - fun(x - e)) / (2 * e[i])
    return out


def certify(entry, h=1e-7):
    """Residual of the reference solution, from finite differences only.

    For feasible problems this is the larger of ``||c(x*)||_inf`` and the
    projected-gradient KKT residual, using ``y_star`` or, if absent, a
    least-squares multiplier over the variables strictly inside the bounds.
    For infeasible problems it is the projected gradient of ``0.5||c||^2``
    together with ``|v(x*) - v_star|``.  Returns the worst value over all
    listed solutions.
    """
    p = entry.problem
    worst = 0.0
    for x in entry.solutions():
        if entry.infeasible:
            def viol(z):
                c = p.eval_c(z)
                return 0.5 * c @ c

            grad_v = _fd_grad(viol, x, h)
            res = np.max(np.abs(p.project(x - grad_v) - x))
            worst = max(worst, res, abs(viol(x) - entry.v_star))
            continue
        grad_f = _fd_grad(p.eval_f, x, h)
        jac = (np.array([_fd_grad(lambda z, i=i: p.eval_c(z)[i], x, h) for i in range(p.m)])
               if p.m else np.zeros((0, p.n)))
        if entry.y_star is not None:
            y = entry.y_star
        elif p.m:
            free = (x > p.lower + 1e-12) & (x < p.upper - 1e-12)
            y = np.linalg.lstsq(jac[:, free].T, grad_f[free], rcond=None)[0]
        else:
            y = np.zeros(0)
        grad_lag = grad_f - jac.T @ y
        res = np.max(np.abs(p.project(x - grad_lag) - x))
        c_inf = np.max(np.abs(p.eval_c(x))) if p.m else 0.0
        worst = max(worst, res, c_inf)
    return float(worst)
