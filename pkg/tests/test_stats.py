import numpy as np
import pytest

from stablewalk.errors import (DegenerateSampleError, InsufficientReplicasError,
                               InvalidParameterError, StopTimeError)
from stablewalk.stats import (FIXED_TIME, LEVEL_CROSSING, apply_stop_rule,
                              cramer_wold_projection, estimate_sigma,
                              fdd_covariance_report, normality_report,
                              stopped_increment_report, stopped_increments)


def brownian_paths(m, times, rng, scale=1.0):
    times = np.asarray(times, dtype=float)
    dt = np.diff(np.concatenate([[0.0], times]))
    steps = rng.standard_normal((m, len(times))) * np.sqrt(dt) * scale
    return np.cumsum(steps, axis=1)


def test_normality_accepts_normal_samples():
    rng = np.random.default_rng(100)
    rep = normality_report(rng.standard_normal(2000), seed=1)
    assert rep.p_values["ks_bootstrap"] > 0.01
    assert rep.passed


def test_normality_rejects_exponential():
    rng = np.random.default_rng(101)
    rep = normality_report(rng.exponential(size=2000), seed=1)
    assert rep.p_values["ks_bootstrap"] < 0.01
    assert not rep.passed


def test_normality_degenerate():
    with pytest.raises(DegenerateSampleError):
        normality_report(np.ones(500))


def test_normality_needs_samples():
    with pytest.raises(InsufficientReplicasError):
        normality_report(np.arange(50.0))


def test_fdd_covariance_brownian():
    rng = np.random.default_rng(7)
    grid = [0.25, 0.5, 0.75, 1.0]
    x = brownian_paths(5000, grid, rng)
    rep = fdd_covariance_report(x, n=1, t_grid=grid, seed=2, rel_tol=0.10)
    assert rep.passed
    # diagonal at the largest time is exactly 1 by construction of sigma_hat
    assert rep.statistics["cov_1_1"] == pytest.approx(1.0, abs=1e-9)


def test_fdd_scale_invariance():
    rng = np.random.default_rng(8)
    grid = [0.25, 0.5, 0.75, 1.0]
    x = brownian_paths(5000, grid, rng, scale=np.sqrt(2.0))
    rep = fdd_covariance_report(x, n=1, t_grid=grid, seed=2, rel_tol=0.10)
    assert rep.passed  # variance-2t process normalizes to the same matrix


def test_fdd_needs_replicas():
    with pytest.raises(InsufficientReplicasError):
        fdd_covariance_report(np.zeros((100, 4)), 1, [0.25, 0.5, 0.75, 1.0])


def test_cramer_wold_basis_vector():
    rng = np.random.default_rng(9)
    grid = [0.5, 1.0]
    x = brownian_paths(3000, grid, rng)
    center = np.zeros(2)
    sigma = estimate_sigma(x[:, -1], 1, 1.0)
    proj = cramer_wold_projection(x, 1, grid, [1.0, 0.0], center=center,
                                  sigma_hat=sigma)
    assert np.allclose(proj, x[:, 0] / sigma)


def test_cramer_wold_zero_vector():
    x = np.random.default_rng(10).standard_normal((500, 3))
    proj = cramer_wold_projection(x, 1, [0.25, 0.5, 1.0], [0.0, 0.0, 0.0],
                                  center=np.zeros(3), sigma_hat=1.0)
    assert np.allclose(proj, 0.0)


def test_cramer_wold_increment_variance():
    rng = np.random.default_rng(11)
    grid = [0.5, 1.0]
    x = brownian_paths(20000, grid, rng)
    proj = cramer_wold_projection(x, 1, grid, [1.0, -1.0])
    # projection is -(B_1 - B_0.5): variance sigma^2 * 0.5 after normalization
    assert np.var(proj) == pytest.approx(0.5, rel=0.1)


def test_cramer_wold_length_mismatch():
    with pytest.raises(InvalidParameterError):
        cramer_wold_projection(np.zeros((10, 3)), 1, [1, 2, 3], [1.0, 2.0])


def test_stop_rules_and_increments_brownian():
    rng = np.random.default_rng(12)
    times = np.round(np.arange(1, 45) * 0.025, 6)
    x = brownian_paths(4000, times, rng)
    for rule in ((FIXED_TIME, 0.5), (LEVEL_CROSSING, 0.5, 0.5)):
        stop_idx = apply_stop_rule(times, x, rule)
        ladder = [0.2, 0.1, 0.05]
        inc = stopped_increments(times, x, stop_idx, ladder)
        rep = stopped_increment_report(ladder, inc, epsilon=0.5, ceiling=0.25,
                                       rule_name=rule[0])
        probs = [rep.statistics[f"p_h={h:g}"] for h in ladder]
        assert probs[0] > probs[-1]  # Brownian continuity
        assert rep.passed


def test_stopped_increment_h_zero_and_huge_epsilon():
    rng = np.random.default_rng(13)
    times = np.array([0.25, 0.5, 0.75, 1.0])
    x = brownian_paths(500, times, rng)
    idx = apply_stop_rule(times, x, (FIXED_TIME, 0.5))
    inc = stopped_increments(times, x, idx, [0.25, 0.0])
    assert np.all(inc[0.0] == 0.0)
    rep = stopped_increment_report([0.25, 0.0], inc, epsilon=1e6,
                                   ceiling=0.1, rule_name="fixed-time")
    assert rep.statistics["p_h=0.25"] == 0.0


def test_stop_beyond_horizon():
    times = np.array([0.5, 1.0])
    x = np.zeros((10, 2))
    idx = apply_stop_rule(times, x, (FIXED_TIME, 1.0))
    with pytest.raises(StopTimeError):
        stopped_increments(times, x, idx, [0.5])


def test_reports_are_reproducible():
    rng = np.random.default_rng(14)
    data = rng.standard_normal(800)
    a = normality_report(data, seed=3).to_dict()
    b = normality_report(data, seed=3).to_dict()
    assert a == b
