import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from adaptive_al.nlp_core import ConfigurationError
from adaptive_al.qp_subproblem import QpSpec, QpStatus, sanity_check_step, solve_bound_qp

from oracles import box_qp_by_enumeration, random_box_qp


def spec_for(hess, b, lower, upper, start=None):
    hess = np.atleast_2d(hess)
    start = np.zeros(len(b)) if start is None else start
    return QpSpec(lambda v: hess @ v, b, lower, upper, start)


def test_unconstrained_diagonal_minimizer():
    d = np.array([1.0, 4.0, 0.5])
    b = np.array([1.0, -2.0, 0.25])
    res = solve_bound_qp(spec_for(np.diag(d), b, -10 * np.ones(3), 10 * np.ones(3)), tol=1e-12)
    assert res.status is QpStatus.CONVERGED
    assert_allclose(res.step, -b / d, atol=1e-12)


def test_one_dimensional_clamped():
    res = solve_bound_qp(spec_for([[1.0]], np.array([1.0]), [-0.5], [0.5]))
    assert res.status is QpStatus.CONVERGED
    assert res.step.tolist() == [-0.5]
    # multiplier at the lower face: gradient s + 1 = 0.5 >= 0
    assert res.step[0] + 1.0 == 0.5


def test_zero_gradient_indefinite_returns_origin():
    res = solve_bound_qp(spec_for(np.diag([1.0, -1.0]), np.zeros(2), -np.ones(2), np.ones(2)))
    assert res.status is QpStatus.CONVERGED
    assert not np.any(res.step)


def test_negative_curvature_truncates_at_box():
    # gradient along the negative-curvature axis: CG's first direction is (0, 0.1)
    res = solve_bound_qp(spec_for(np.diag([1.0, -1.0]), np.array([0.0, -0.1]),
                                  -np.ones(2), np.ones(2)))
    assert res.status is QpStatus.NEGATIVE_CURVATURE
    assert_allclose(res.step, [0.0, 1.0])


def test_spec_rejects_box_without_origin():
    with pytest.raises(ConfigurationError):
        spec_for([[1.0]], np.array([1.0]), [0.5], [1.0])


def test_spec_rejects_start_outside_box():
    with pytest.raises(ConfigurationError):
        spec_for([[1.0]], np.array([1.0]), [-1.0], [1.0], start=np.array([2.0]))


def test_trust_region_box():
    spec = QpSpec.trust_region(lambda v: v, np.ones(2), np.array([0.0, 0.5]),
                               np.array([0.0, 0.0]), np.array([1.0, 1.0]), 0.3, np.zeros(2))
    assert_allclose(spec.lower, [0.0, -0.3])
    assert_allclose(spec.upper, [0.3, 0.3])


def test_sanity_check_step_choices():
    reductions = {"a": 2.0, "b": 1.0, "c": 0.5, "d": 1.0}
    assert sanity_check_step("a", "b", reductions.get) == "a"
    assert sanity_check_step("c", "b", reductions.get) == "b"
    assert sanity_check_step("d", "b", reductions.get) == "d"


def test_matches_enumeration_on_random_convex_qps():
    rng = np.random.default_rng(2024)
    problems = [random_box_qp(rng, int(rng.integers(1, 9))) for _ in range(200)]
    elapsed, worst = 0.0, 0.0
    for hess, b, lower, upper in problems:
        start = time.perf_counter()
        res = solve_bound_qp(spec_for(hess, b, lower, upper), tol=1e-12)
        elapsed += time.perf_counter() - start
        value = b @ res.step + 0.5 * res.step @ hess @ res.step
        best, _ = box_qp_by_enumeration(hess, b, lower, upper)
        worst = max(worst, abs(value - best))
    assert worst <= 1e-8
    assert elapsed < 10.0


@st.composite
def qp_with_start(draw):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 6))
    a = rng.standard_normal((n, n))
    hess = a.T @ a - draw(st.floats(0, 2)) * np.eye(n)  # possibly indefinite
    b = rng.standard_normal(n)
    lower, upper = -rng.uniform(0, 2, n), rng.uniform(0, 2, n)
    start = rng.uniform(lower, upper) * draw(st.floats(0, 1))
    return hess, b, lower, upper, start


@given(qp_with_start())
def test_step_in_box_and_no_worse_than_start(data):
    hess, b, lower, upper, start = data
    spec = spec_for(hess, b, lower, upper, start)
    res = solve_bound_qp(spec)
    assert np.all(res.step >= lower) and np.all(res.step <= upper)
    assert spec.value(res.step) <= spec.value(spec.start) + 1e-12 * (1 + abs(spec.value(spec.start)))
