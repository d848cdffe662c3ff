"""Small problem builders shared by the tests."""

import numpy as np

from adaptive_al.al_model import AlPoint
from adaptive_al.nlp_core import Problem


def linear_problem(a, b, hess, grad0=None, lower=None, upper=None, x0=None):
    """min 0.5 x^T H x + g0^T x  s.t.  A x = b."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    hess = np.atleast_2d(np.asarray(hess, dtype=float))
    m, n = a.shape
    g0 = np.zeros(n) if grad0 is None else np.asarray(grad0, dtype=float)
    return Problem.from_dense(
        n, m,
        lambda x: 0.5 * x @ hess @ x + g0 @ x,
        lambda x: hess @ x + g0,
        lambda x: a @ x - b,
        lambda x: a,
        lambda x, y: hess,
        lower=lower, upper=upper, x0=x0)


def point(problem, x, y=None, mu=1.0):
    y = np.zeros(problem.m) if y is None else y
    return AlPoint.at(problem, np.asarray(x, dtype=float), np.asarray(y, dtype=float), mu)


def random_points(problem, rng, count=3, spread=0.5):
    """Points scattered around ``x0`` and projected into the box."""
    return [problem.project(problem.x0 + spread * rng.standard_normal(problem.n))
            for _ in range(count)]
