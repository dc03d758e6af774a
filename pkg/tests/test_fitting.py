import numpy as np
import pytest

from eomtrans.errors import FitConvergenceError
from eomtrans.fitting import fit_single_parameter, grid_scan_init, least_squares


def test_recovers_quadratic_minimum():
    x = np.linspace(-2.0, 2.0, 50)
    data = 3.7 * x**2

    def residual(p):
        return p[0] * x**2 - data

    p, stderr, norms, converged = least_squares(residual, [1.0])
    assert converged
    assert p[0] == pytest.approx(3.7, rel=1e-8)
    assert np.isfinite(stderr[0])


def test_history_monotone_nonincreasing():
    rng = np.random.default_rng(0)
    x = np.linspace(0.0, 1.0, 80)
    data = np.exp(-3.0 * x) + 0.01 * rng.standard_normal(x.size)

    def residual(p):
        return np.exp(-p[0] * x) - data

    result = fit_single_parameter(residual, "rate", "1/s", [0.5, 1.0, 5.0, 10.0])
    assert result.converged
    assert all(b <= a + 1e-15 for a, b in zip(result.history, result.history[1:]))
    assert result.estimate == pytest.approx(3.0, abs=0.2)
    assert result.iterations == len(result.history) - 1


def test_grid_scan_picks_best_start():
    def residual(p):
        return np.array([p[0] - 7.0])

    assert grid_scan_init(residual, [0.1, 1.0, 8.0, 100.0]) == 8.0


def test_grid_scan_rejects_all_nan():
    def residual(p):
        return np.array([np.nan])

    with pytest.raises(FitConvergenceError):
        grid_scan_init(residual, [1.0, 2.0])


def test_two_parameter_fit():
    x = np.linspace(0.0, 4.0, 60)
    data = 2.0 * x + 0.7

    def residual(p):
        return p[0] * x + p[1] - data

    p, stderr, _, converged = least_squares(residual, [1.0, 0.0])
    assert converged
    assert p[0] == pytest.approx(2.0, rel=1e-9)
    assert p[1] == pytest.approx(0.7, rel=1e-9)
