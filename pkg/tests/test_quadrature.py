import numpy as np
import pytest
from scipy.integrate import quad

from kamprop.errors import QuadratureError
from kamprop.linalg import SIGMA_X, SIGMA_Z
from kamprop.quadrature import CompositeGrid, integrate


def test_polynomial_exact():
    grid = CompositeGrid(0.0, 1.0, panels=3, order=8)
    # degree 15 is exact for an 8-point rule
    assert grid.integral(grid.nodes**15) == pytest.approx(1 / 16, abs=1e-15)


@pytest.mark.parametrize("order", [4, 8, 16])
def test_integrate_smooth_against_quad(order):
    fn = lambda s: np.exp(np.sin(3 * s)) * np.cos(s)
    oracle, _ = quad(fn, -0.3, 1.4, epsabs=1e-14, epsrel=1e-13)
    assert integrate(fn, -0.3, 1.4, panels=16, order=order) == pytest.approx(oracle, abs=1e-10)


def test_integrate_reversed_and_empty():
    fn = lambda s: s**2
    assert integrate(fn, 1.0, 0.0) == pytest.approx(-1 / 3, abs=1e-14)
    assert integrate(fn, 0.5, 0.5) == 0.0


def test_integrate_matrix_valued():
    fn = lambda s: np.cos(s)[:, None, None] * SIGMA_X + (s**2)[:, None, None] * SIGMA_Z
    out = integrate(fn, 0.0, 2.0)
    np.testing.assert_allclose(out, np.sin(2.0) * SIGMA_X + 8 / 3 * SIGMA_Z, atol=1e-13)


def test_integrate_kink_needs_breaks():
    fn = lambda s: np.abs(s - 0.3)
    exact = 0.5 * (0.3**2 + 0.7**2)
    assert integrate(fn, 0.0, 1.0, panels=7, breaks=(0.3,)) == pytest.approx(exact, abs=1e-14)


def test_integrate_reports_non_convergence():
    fn = lambda s: np.sqrt(np.abs(s - 0.3141))
    with pytest.raises(QuadratureError) as info:
        integrate(fn, 0.0, 1.0, panels=3, order=4, tol=1e-14, max_doublings=2)
    assert info.value.estimate is not None


def test_integrate_rejects_order():
    with pytest.raises(ValueError):
        integrate(lambda s: s, 0.0, 1.0, order=5)


def test_breaks_are_panel_edges():
    grid = CompositeGrid(-0.5, 1.5, panels=10, breaks=(0.0, 1.0), scale=1.0)
    assert 0.0 in grid.edges and 1.0 in grid.edges
    assert np.max(np.diff(grid.edges)) <= 0.1 + 1e-12
    fine = grid.refined()
    assert fine.panels == 2 * grid.panels
    assert set(grid.edges) <= set(fine.edges)


def test_antiderivative_at_arbitrary_points():
    grid = CompositeGrid(0.0, 2.0, panels=8, order=8)
    anti = grid.antiderivative(np.cos(3 * grid.nodes))
    ts = np.array([0.0, 0.123, 0.77, 1.5, 2.0])
    np.testing.assert_allclose(anti(ts), np.sin(3 * ts) / 3, atol=1e-11)
    assert anti(1.1) == pytest.approx(np.sin(3.3) / 3, abs=1e-11)


def test_interpolant_reproduces_smooth_function():
    grid = CompositeGrid(0.0, 1.0, panels=8, order=16)
    interp = grid.interpolant(np.exp(grid.nodes))
    ts = np.linspace(0, 1, 17)
    np.testing.assert_allclose(interp(ts), np.exp(ts), atol=1e-14)


def test_locate_rejects_outside():
    grid = CompositeGrid(0.0, 1.0, panels=4)
    with pytest.raises(ValueError):
        grid.interpolant(grid.nodes)(1.5)
