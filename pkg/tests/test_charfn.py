"""The certified series evaluator against a brute-force partial sum.

The oracle sums the radial cosine series directly to a large cutoff and
bounds the remainder by summation by parts, so its own error is certified;
agreement is required within the combined certified errors.
"""

import numpy as np
import pytest
from scipy.special import zeta

from stablewalk.charfn import AxialCharModel, LazyCharModel, zeta_any
from stablewalk.errors import InvalidParameterError

CUTOFF = 2_000_000


def brute_one_minus_psi(alpha, t):
    r = np.arange(1, CUTOFF + 1, dtype=float)
    z = zeta(1 + alpha, 1.0)
    val = np.sum(r ** (-1 - alpha) * np.cos(r * t)) / z
    tail = 2 * (CUTOFF + 1.0) ** (-1 - alpha) / abs(np.sin(t / 2)) / z
    return 1.0 - val, tail


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0, 1.05, 1.5, 1.9])
@pytest.mark.parametrize("t", [0.02, 0.3, 1.2, 2.7, np.pi])
def test_series_matches_brute_force(alpha, t):
    model = AxialCharModel(alpha)
    val, err = model.one_minus_psi(np.array([t]))
    brute, brute_err = brute_one_minus_psi(alpha, t)
    assert abs(val[0] - brute) <= err[0] + brute_err


def test_alpha_near_one_guard():
    with pytest.raises(InvalidParameterError):
        AxialCharModel(1.02)
    AxialCharModel(1.0)  # exact closed form allowed


def test_zeta_any_values():
    assert zeta_any(0.5) == pytest.approx(-1.4603545088095868, rel=1e-12)
    assert zeta_any(2.0) == pytest.approx(np.pi ** 2 / 6, rel=1e-13)
    assert zeta_any(1.7) == pytest.approx(float(zeta(1.7, 1.0)), rel=1e-13)


@pytest.mark.parametrize("alpha", [0.7, 1.5])
def test_interval_bounds_dominate_numeric(alpha):
    model = AxialCharModel(alpha)
    h = 1e-6
    for lo, hi in [(0.05, 0.1), (0.4, 0.9), (2.0, np.pi - 1e-9)]:
        grid = np.linspace(lo, hi, 200)
        v_minus, _ = model.one_minus_psi(grid - h)
        v_plus, _ = model.one_minus_psi(grid + h)
        num_d1 = np.abs((v_plus - v_minus) / (2 * h)).max()
        assert num_d1 <= float(model.dpsi_max(np.array([lo]),
                                              np.array([hi]))[0]) * (1 + 1e-6)
        vals, errs = model.one_minus_psi(grid)
        assert model.min_one_minus_psi(lo, hi) <= float((vals - errs).min()) + 1e-12
        num_d2 = np.abs((v_plus + v_minus - 2 * model.one_minus_psi(grid)[0])
                        / h ** 2).max()
        assert num_d2 <= float(model.d2psi_max(np.array([lo]),
                                               np.array([hi]))[0]) * (1 + 1e-4)


def test_lazy_model_exact():
    model = LazyCharModel()
    t = np.linspace(0.01, np.pi, 50)
    vals, errs = model.one_minus_psi(t)
    assert np.allclose(vals, 1 - np.cos(t))
    assert model.min_one_minus_psi(0.5, 1.0) == pytest.approx(1 - np.cos(0.5))
    assert float(model.dpsi_max(np.array([0.3]), np.array([2.0]))[0]) \
        == pytest.approx(1.0, abs=1e-12)
