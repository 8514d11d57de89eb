import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from kamprop.linalg import SIGMA_X, SIGMA_Z, hermiticity_defect
from kamprop.model import Pulse, PulseShape, SuddenProblem, hamiltonian, pulse_phase, pulse_value, two_level_problem

SIN2 = Pulse(1.0, 0.0, 1.0, PulseShape.SIN2)


@pytest.mark.parametrize("t, expected", [(0.5, 2.0), (-0.1, 0.0), (0.25, 1.0), (1.3, 0.0)])
def test_pulse_value_examples(t, expected):
    assert pulse_value(SIN2, t) == pytest.approx(expected, abs=1e-15)


def test_pulse_value_zero_outside_support_exactly():
    ts = np.array([-5.0, -1e-9, 1.0 + 1e-9, 7.0])
    assert np.all(pulse_value(SIN2, ts) == 0.0)
    assert np.all(pulse_value(Pulse(2.0, 0, 1, PulseShape.CONSTANT), ts) == 0.0)


@pytest.mark.parametrize("pulse", [SIN2, Pulse(2.3, -0.4, 1.7, PulseShape.SIN2), Pulse(0.7, 0.2, 0.9, PulseShape.CONSTANT)])
def test_area_by_quadrature(pulse):
    total, _ = quad(lambda t: pulse_value(pulse, t), pulse.t_start, pulse.t_end, epsabs=1e-13, epsrel=1e-12)
    assert total == pytest.approx(pulse.area, abs=1e-10)


def test_phase_examples():
    assert pulse_phase(SIN2, 0.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert pulse_phase(SIN2, 0.37, 0.37) == 0.0
    oracle, _ = quad(lambda t: pulse_value(SIN2, t), 0.0, 0.5, epsabs=1e-14)
    assert pulse_phase(SIN2, 0.0, 0.5) == pytest.approx(oracle, abs=1e-13)
    assert oracle == pytest.approx(0.5, abs=1e-13)


def test_phase_matches_quadrature_general_pulse():
    p = Pulse(1.7, -0.3, 0.8, PulseShape.SIN2)
    for a, b in [(-1.0, 0.1), (0.2, 0.5), (0.6, 2.0)]:
        oracle, _ = quad(lambda t: pulse_value(p, t), a, b, points=[p.t_start, p.t_end], epsabs=1e-14)
        assert pulse_phase(p, a, b) == pytest.approx(oracle, abs=1e-12)


times = st.floats(-2, 3, allow_nan=False)


@given(times, times, times)
def test_phase_additive(t0, t1, t2):
    total = pulse_phase(SIN2, t0, t2)
    assert total == pytest.approx(pulse_phase(SIN2, t1, t2) + pulse_phase(SIN2, t0, t1), abs=1e-13)


@given(st.floats(-1, 2))
def test_sin2_envelope_non_negative(t):
    assert pulse_value(SIN2, t) >= 0.0


def test_hamiltonian_examples():
    problem = two_level_problem(1.0, 0.5)
    np.testing.assert_allclose(hamiltonian(problem, 0.5), 2 * SIGMA_X + 0.5 * SIGMA_Z, atol=1e-15)
    np.testing.assert_allclose(hamiltonian(problem, 1.5), 0.5 * SIGMA_Z, atol=0)
    zero = two_level_problem(1.0, 0.0)
    for t in (0.1, 0.3, 0.8):
        np.testing.assert_allclose(hamiltonian(zero, t), pulse_value(SIN2, t) * SIGMA_X, atol=0)


def test_hamiltonian_hermitian_and_batched():
    problem = two_level_problem(1.3, 0.7)
    ts = np.linspace(-0.5, 1.5, 41)
    hs = hamiltonian(problem, ts)
    assert hs.shape == (41, 2, 2)
    assert hermiticity_defect(hs) == 0.0
    np.testing.assert_allclose(hs[10], hamiltonian(problem, ts[10]), atol=0)


def test_pulse_validation():
    with pytest.raises(ValueError):
        Pulse(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        Pulse(float("nan"))


def test_problem_validation():
    with pytest.raises(ValueError):
        SuddenProblem(SIN2, np.array([[0, 1], [0, 0]]), SIGMA_Z, 0.5)
    with pytest.raises(ValueError):
        SuddenProblem(SIN2, SIGMA_X, np.eye(3), 0.5)
    with pytest.raises(ValueError):
        SuddenProblem(SIN2, SIGMA_X, SIGMA_Z, -0.1)


def test_problem_operators_immutable():
    problem = two_level_problem()
    with pytest.raises(ValueError):
        problem.coupling_operator[0, 0] = 3.0
