import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from adaptive_al.al_model import (
    AlPoint,
    ModelKind,
    curvature,
    eval_qhat,
    eval_qN,
    eval_qtilde,
    eval_qv,
    evaluate_model,
    model_convergence_gap,
    pi,
    reduction_quadratic,
    reduction_qtilde,
    reduction_qv,
)
from adaptive_al.nlp_core import DomainError, EvaluationError, Problem
from adaptive_al.problems import get_problem

from helpers import point

vec3 = arrays(float, 3, elements=st.floats(-3, 3))


def test_pi_fixed_at_feasible_point():
    assert_array_equal(pi(np.zeros(2), np.array([3.0, -1.0]), 0.5), [3.0, -1.0])


def test_pi_arithmetic():
    assert_array_equal(pi(np.array([0.5]), np.array([1.0]), 0.5), [0.0])
    assert_allclose(pi(np.array([1.0, 1.0]), np.zeros(2), 0.1), [-10.0, -10.0])


def test_pi_rejects_nonpositive_mu():
    with pytest.raises(DomainError):
        pi(np.zeros(1), np.zeros(1), -1.0)


def test_alpoint_rejects_nan():
    p = Problem.from_dense(1, 0, lambda x: np.nan, lambda x: [0.0], None, None,
                           lambda x, y: [[0.0]])
    with pytest.raises(EvaluationError):
        AlPoint.at(p, np.zeros(1), np.zeros(0), 1.0)


def test_al_value_reproducible_from_parts():
    p = get_problem("hs39").problem
    pt = point(p, [0.3, -0.2, 1.1, 0.4], [0.5, -1.5], 0.3)
    c = p.eval_c(pt.x)
    expected = 0.3 * (p.eval_f(pt.x) - c @ pt.y) + 0.5 * c @ c
    assert pt.L == pytest.approx(expected, rel=1e-14)
    assert pt.v >= 0


def _one_constraint():
    # c(x) = x1 + 1, J = [1, 0]
    return Problem.from_dense(
        2, 1, lambda x: 0.0, lambda x: np.zeros(2), lambda x: [x[0] + 1.0],
        lambda x: [[1.0, 0.0]], lambda x, y: np.zeros((2, 2)))


def test_qv_zero_step():
    pt = point(_one_constraint(), [0.0, 0.0])
    assert eval_qv(pt, np.zeros(2)) == pt.v == 0.5
    assert reduction_qv(pt, np.zeros(2)) == 0.0


def test_qv_exact_correction():
    pt = point(_one_constraint(), [0.0, 0.0])
    assert eval_qv(pt, np.array([-1.0, 0.0])) == 0.0
    assert reduction_qv(pt, np.array([-1.0, 0.0])) == 0.5


def test_qv_overshoot():
    pt = point(_one_constraint(), [0.0, 0.0])
    assert eval_qv(pt, np.array([-2.0, 0.0])) == 0.5
    assert reduction_qv(pt, np.array([-2.0, 0.0])) == 0.0


@given(vec3, vec3)
def test_qv_reduction_matches_expansion(x, s):
    p = get_problem("hs26").problem
    pt = point(p, x)
    js = pt.jprod(s)
    expansion = -float(s @ pt.jtc) - 0.5 * float(js @ js)
    assert reduction_qv(pt, s) == pytest.approx(expansion, rel=1e-12, abs=1e-12)


def test_qv_identically_zero_without_constraints():
    pt = point(get_problem("bound_only").problem, [1.0, 1.0])
    assert reduction_qv(pt, np.array([0.3, -0.4])) == 0.0
    assert pt.v == 0.0


def test_qtilde_zero_step():
    pt = point(get_problem("hs7").problem, [0.5, 1.0], [0.2], 0.4)
    assert reduction_qtilde(pt, np.zeros(2)) == 0.0
    assert eval_qtilde(pt, np.zeros(2)) == pt.L


def test_qtilde_clamp_hand_example():
    # sT(mu H + JT J)s = -4 and grad_L^T s = -1 exactly
    p = Problem.from_dense(
        1, 0, lambda x: x[0] - 2 * x[0] ** 2, lambda x: [1 - 4 * x[0]], None, None,
        lambda x, y: [[-4.0]])
    pt = point(p, [0.0], np.zeros(0), 1.0)
    s = np.array([-1.0])
    assert curvature(pt, s) == -4.0
    assert float(pt.grad_L @ s) == -1.0
    assert reduction_qtilde(pt, s) == 1.0
    assert reduction_quadratic(pt, s) == 3.0


def test_qtilde_positive_curvature_branch():
    pt = point(get_problem("lin_eq_quadratic").problem, [0.0, 0.0])
    s = np.array([0.1, 0.2])
    assert reduction_qtilde(pt, s) < -float(pt.grad_L @ s)
    assert reduction_qtilde(pt, s) == reduction_quadratic(pt, s)


@given(vec3, vec3, st.floats(1e-6, 10))
def test_qtilde_reduction_bounded_by_linear_term(x, s, mu):
    p = get_problem("hs26").problem
    pt = point(p, x, [0.7], mu)
    assert reduction_qtilde(pt, s) <= -float(pt.grad_L @ s) + 1e-12 * (1 + np.abs(pt.grad_L) @ np.abs(s))


@given(arrays(float, 2, elements=st.floats(-3, 3)), st.floats(1e-3, 10))
def test_qtilde_equals_quadratic_when_psd(s, mu):
    pt = point(get_problem("lin_eq_quadratic").problem, [0.2, 0.4], [0.3], mu)
    assert reduction_qtilde(pt, s) == reduction_quadratic(pt, s)


def test_model_reductions_vanish_at_zero_step():
    pt = point(get_problem("hs39").problem, [0.3, -0.2, 1.1, 0.4], [0.5, -1.5], 0.3)
    for kind in ModelKind:
        assert evaluate_model(kind, pt, np.zeros(4)).reduction == 0.0


def test_qhat_qN_zero_step():
    pt = point(get_problem("hs7").problem, [0.5, 1.0], [0.2], 0.4)
    assert eval_qhat(pt, np.zeros(2)) == 0.0
    assert eval_qN(pt, np.zeros(2)) == 0.0


def test_qhat_equals_qN_when_feasible():
    p = get_problem("hs7").problem
    x = np.array([0.0, np.sqrt(3.0)])
    pt = point(p, x, [0.3], 0.2)
    assert np.max(np.abs(pt.c)) < 1e-15
    s = np.array([0.4, -0.7])
    assert eval_qhat(pt, s) == eval_qN(pt, s)


@given(arrays(float, 5, elements=st.floats(-2, 2)))
def test_qhat_equals_qN_for_constant_hessian(s):
    pt = point(get_problem("hs48").problem, np.arange(5.0), [0.5, -1.0], 0.3)
    assert eval_qhat(pt, s) == pytest.approx(eval_qN(pt, s), rel=1e-14, abs=1e-14)


@given(vec3, st.floats(1e-4, 5))
def test_mu_times_qhat_is_quadratic_model(s, mu):
    pt = point(get_problem("hs26").problem, [0.2, 1.3, -0.5], [0.4], mu)
    assert mu * eval_qhat(pt, s) == pytest.approx(-reduction_quadratic(pt, s), rel=1e-10, abs=1e-10)


def test_convergence_gap_radius_zero():
    p = get_problem("hs7").problem
    pt = point(p, [0.5, 1.0], [0.2], 0.4)
    assert model_convergence_gap(pt, 0.0) == pytest.approx(abs(0.4 * pt.lagrangian), rel=1e-14)


def test_convergence_gap_zero_when_models_coincide():
    # f = 2 (x1 - x2) - 1 and c = x1 - x2 - 0.5, so f - 2 c = 0 everywhere
    p = Problem.from_dense(
        2, 1, lambda x: 2 * (x[0] - x[1]) - 1, lambda x: [2.0, -2.0],
        lambda x: [x[0] - x[1] - 0.5], lambda x: [[1.0, -1.0]], lambda x, y: np.zeros((2, 2)))
    pt = point(p, [0.3, -0.1], [2.0], 1.0)
    assert pt.lagrangian == 0.0
    assert model_convergence_gap(pt, 1.0) <= 1e-14


def test_convergence_gap_vanishes_as_mu_shrinks():
    p = get_problem("lin_eq_quadratic").problem
    pt = point(p, [0.3, 0.9], [0.5], 1e-14)
    assert model_convergence_gap(pt, 1.0) <= 1e-8
