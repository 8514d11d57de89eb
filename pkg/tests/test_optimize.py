import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kamprop.errors import KamPropError
from kamprop.kam import KamParams, build_chain, default_params, lambda_objective
from kamprop.metrics import delta_error
from kamprop.model import two_level_problem
from kamprop.optimize import (
    golden_section,
    joint_scan,
    optimize_iteration_sequence,
    parse_selector,
    scan_lambda,
    scan_objective,
    with_parameter,
)
from kamprop.propagator import reference_for

PROBLEM = two_level_problem(1.0, 0.5)


def test_paraboloid_minimum():
    result = scan_objective(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 101)
    assert result.refined[0] == pytest.approx(0.3, abs=1e-4)
    assert result.refined[1] <= result.best[1] + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.1, 5.0))
def test_refined_never_worse_than_grid(center, width):
    fn = lambda x: math.cos(width * (x - center)) + 0.1 * x
    result = scan_objective(fn, 0.0, 1.0, 11)
    assert result.refined[1] <= min(v for _, v in result.grid) + 1e-15


def test_golden_section_reports_rise():
    tent = lambda x: -abs(x - 0.5)
    _, _, _, rose = golden_section(tent, 0.0, 1.0)
    assert rose


def test_non_unimodal_bracket_falls_back_to_grid():
    # a narrow spike above both ends between two grid points
    fn = lambda x: x if abs(x - 0.015) > 0.004 else 5.0
    result = scan_objective(fn, 0.0, 1.0, 101)
    assert result.refined == result.best


def test_degenerate_objective():
    result = scan_objective(lambda x: 0.0, 0.0, 1.0, 11)
    assert result.degenerate
    assert result.refined == (pytest.approx(0.05), 0.0)


def test_failures_recorded_and_limit():
    def sometimes(x):
        if x in (0.0, 0.5):
            raise KamPropError("boom")
        return (x - 0.7) ** 2

    result = scan_objective(sometimes, 0.0, 1.0, 11)
    assert [x for x, _ in result.failures] == [0.0, 0.5]
    assert result.refined[0] == pytest.approx(0.7, abs=1e-4)

    def mostly(x):
        if x < 0.5:
            raise KamPropError("boom")
        return x

    with pytest.raises(KamPropError):
        scan_objective(mostly, 0.0, 1.0, 11)


def test_scan_validation():
    with pytest.raises(ValueError):
        scan_objective(lambda x: x, 0.0, 1.0, 2)
    with pytest.raises(ValueError):
        scan_objective(lambda x: x, 1.0, 0.0, 11)


def test_selectors():
    assert parse_selector("t2") == (2, "t_free")
    assert parse_selector("t1_lower") == (1, "t_lower")
    for bad in ("t0", "t4", "x1", "t1_upper"):
        with pytest.raises(ValueError):
            parse_selector(bad)
    params = with_parameter([KamParams(t_free=0.4)], "t2", 0.1)
    assert len(params) == 2 and params[0].t_free == 0.4 and params[1].t_free == 0.1


@pytest.fixture(scope="module")
def t1_scan():
    return scan_lambda(PROBLEM, default_params(1), "t1", 0.0, 1.0, 101)


def test_t1_star(t1_scan):
    assert t1_scan.refined[0] == pytest.approx(0.39, abs=0.03)
    assert all(math.isfinite(v) and v >= 0 for _, v in t1_scan.grid)
    assert not t1_scan.failures


def test_scan_deterministic(t1_scan):
    again = scan_lambda(PROBLEM, default_params(1), "t1", 0.0, 1.0, 101)
    assert again.grid == t1_scan.grid and again.refined == t1_scan.refined


def test_zero_epsilon_scan():
    result = scan_lambda(PROBLEM.with_epsilon(0.0), default_params(1), "t1", 0.0, 1.0, 101)
    assert all(v == 0.0 for _, v in result.grid)
    assert result.degenerate
    assert result.refined == (pytest.approx(0.005), 0.0)


def test_sequence_n1():
    (p,) = optimize_iteration_sequence(PROBLEM, 1)
    assert p.t_free == pytest.approx(0.39, abs=0.03)


def test_sequence_zero_epsilon_returns_defaults():
    params = optimize_iteration_sequence(PROBLEM.with_epsilon(0.0), 2)
    assert [p.t_free for p in params] == [0.0, 0.0]


def test_sequence_n2_beats_onset_t2():
    params = optimize_iteration_sequence(PROBLEM, 2)
    ref = reference_for(PROBLEM)
    optimized = delta_error(build_chain(PROBLEM, params).handle(), ref, 0.0, 1.0).delta
    onset = delta_error(build_chain(PROBLEM, with_parameter(params, "t2", 0.0)).handle(), ref, 0.0, 1.0).delta
    assert optimized <= onset


def test_joint_scan_consistent_with_objective():
    (x, y, lam), table = joint_scan(PROBLEM, default_params(2), points=5)
    assert table.shape == (5, 5)
    assert lam == pytest.approx(lambda_objective(PROBLEM, [KamParams(t_free=x), KamParams(t_free=y)]), rel=1e-12)
