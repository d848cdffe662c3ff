import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adaptive_al.cauchy import (
    cauchy_al,
    cauchy_feasibility,
    satisfies_c1,
    satisfies_c2,
    step_norm,
)
from adaptive_al.nlp_core import DomainError, Problem
from adaptive_al.problems import get_problem

from helpers import linear_problem, point


def bounded(name, lower, upper):
    """A suite problem with extra bounds, same callbacks."""
    p = get_problem(name).problem
    return Problem(p.n, p.m, p.eval_f, p.eval_g, p.eval_c, p.jacobian_apply,
                   p.jacobian_transpose_apply, p.lagrangian_hessian_apply,
                   lower=lower, upper=upper)


HS39_BOX = bounded("hs39", [-1.0, -2.0, -0.5, -1.0], [2.0, 1.5, 2.0, 0.5])


def in_box(p, x, step):
    # x + (P(z) - x) can round one ulp past a bound
    z = x + step
    slack = 2 * np.spacing(np.maximum(np.abs(x), np.abs(z)))
    return np.all(z >= p.lower - slack) and np.all(z <= p.upper + slack)


def test_feasibility_cauchy_at_feasible_point():
    pt = point(get_problem("lin_eq_quadratic").problem, [0.3, 0.7])
    res = cauchy_feasibility(pt, 0.0)
    assert (res.l_k, res.gamma_k, res.beta, res.eps_k) == (0, 2.0, 1.0, 0.0)
    assert not np.any(res.r_cauchy)


def test_feasibility_cauchy_without_constraints():
    pt = point(get_problem("bound_only").problem, [1.0, 1.0])
    res = cauchy_feasibility(pt, 0.5)
    assert (res.beta, res.gamma_k) == (1.0, 2.0)
    assert not np.any(res.r_cauchy)


def test_feasibility_cauchy_hand_example():
    # c = x, J = [1], x = 0 shifted so c = 1: accepted at beta = 1
    p = linear_problem([[1.0]], [-1.0], [[0.0]])
    pt = point(p, [0.0])
    res = cauchy_feasibility(pt, 10.0, eps_r=1e-4, gamma=0.5)
    assert res.l_k == 0 and res.gamma_k == 2.0
    assert res.beta == 1.0 and res.eps_k == 0.0
    assert res.r_cauchy.tolist() == [-1.0]
    assert satisfies_c1(pt, res.r_cauchy, 10.0)


def test_feasibility_cauchy_radius_sets_gamma():
    # ||J^T c|| = 1, theta = 0.3: l_k = 2 (0.25 <= 0.3), previous norm 0.5
    p = linear_problem([[1.0]], [-1.0], [[0.0]])
    res = cauchy_feasibility(point(p, [0.0]), 0.3)
    assert res.l_k == 2
    assert res.gamma_k == pytest.approx(0.5 * (1 + 0.5 / 0.3))
    assert step_norm(res.r_cauchy, 2) <= 0.3


def test_feasibility_cauchy_rejects_negative_radius():
    with pytest.raises(DomainError):
        cauchy_feasibility(point(get_problem("hs7").problem, [1.0, 1.0]), -1.0)


def test_al_cauchy_zero_gradient():
    pt = point(get_problem("lin_eq_quadratic").problem, [0.5, 0.5], [1.0], 0.5)
    res = cauchy_al(pt, 1.0, 0.0)
    assert res.alpha == 1.0 and not np.any(res.s_cauchy)


def test_al_cauchy_unit_step_on_convex_quadratic():
    # L = 0.5 x^2 at x = 0.1: the full projected-gradient step is exact
    p = linear_problem(np.zeros((0, 1)), np.zeros(0), [[1.0]])
    pt = point(p, [0.1], np.zeros(0), 1.0)
    res = cauchy_al(pt, 1.0, 0.0)
    assert res.alpha == 1.0
    assert res.s_cauchy == pytest.approx([-0.1])


def test_al_cauchy_tiny_radius():
    p = linear_problem(np.zeros((0, 1)), np.zeros(0), [[0.0]], grad0=[1.0])
    pt = point(p, [0.0], np.zeros(0), 1.0)
    res = cauchy_al(pt, 1e-6, 0.0)
    assert res.alpha == 0.5 ** 20
    assert step_norm(res.s_cauchy, 2) <= 1e-6 < 2 * step_norm(res.s_cauchy, 2)


def test_al_cauchy_zero_radius_short_circuit():
    pt = point(get_problem("hs7").problem, [1.0, 1.0], [0.0], 1.0)
    res = cauchy_al(pt, 0.0, 0.0)
    assert res.alpha == 1.0 and not np.any(res.s_cauchy)


def test_al_cauchy_is_deterministic():
    pt = point(HS39_BOX, [0.5, 0.2, 1.0, -0.3], [0.1, 0.4], 0.2)
    a = cauchy_al(pt, 0.7, 1e-5)
    b = cauchy_al(pt, 0.7, 1e-5)
    assert a.alpha == b.alpha and np.array_equal(a.s_cauchy, b.s_cauchy)


box_points = st.tuples(
    st.floats(-1, 2), st.floats(-2, 1.5), st.floats(-0.5, 2), st.floats(-1, 0.5)
).map(np.array)


@given(box_points, st.floats(0, 5), st.sampled_from([2, np.inf]))
def test_feasibility_cauchy_invariants(x, theta, norm):
    pt = point(HS39_BOX, x)
    res = cauchy_feasibility(pt, theta, norm=norm)
    assert 1.0 < res.gamma_k <= 2.0
    assert 0.0 <= res.eps_k < 1e-4
    assert satisfies_c1(pt, res.r_cauchy, theta, norm=norm)
    assert in_box(HS39_BOX, x, res.r_cauchy)
    assert 0 < res.beta <= 1


@given(box_points, arrays(float, 2, elements=st.floats(-3, 3)), st.floats(1e-4, 10),
       st.floats(1e-3, 5), st.floats(0, 9.9e-5), st.sampled_from([2, np.inf]),
       st.booleans())
def test_al_cauchy_invariants(x, y, mu, Theta, eps_k, norm, convexified):
    pt = point(HS39_BOX, x, y, mu)
    res = cauchy_al(pt, Theta, eps_k, norm=norm, convexified=convexified)
    assert satisfies_c2(pt, res.s_cauchy, Theta, eps_k, norm=norm, convexified=convexified)
    assert in_box(HS39_BOX, x, res.s_cauchy)
    assert 0 < res.alpha <= 1
    assert np.log2(res.alpha) == int(np.log2(res.alpha))
