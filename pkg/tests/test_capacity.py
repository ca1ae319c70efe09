import numpy as np
import pytest

from stablewalk import point_step_law
from stablewalk.capacity import (CapacityEstimate, cap_empty,
                                 capacity_of_set, capacity_process,
                                 decomposition_bounds_check,
                                 equilibrium_capacity, mc_escape_capacity)
from stablewalk.errors import (EquilibriumOutOfRangeError,
                               InvalidParameterError, SingularSystemError)


class FakeEvaluator:
    """Green stand-in returning prescribed values for error-path tests."""

    def __init__(self, fn, err=0.0):
        self.fn = fn
        self.err = err

    def values_at(self, deltas):
        deltas = np.asarray(deltas)
        vals = np.array([self.fn(tuple(d)) for d in deltas], dtype=float)
        return vals, np.full(len(deltas), self.err)


def test_cap_empty_convention():
    assert cap_empty().value == 0.0


def test_singleton_formula(green_table_axial):
    est = equilibrium_capacity([(0, 0)], green_table_axial)
    assert est.value == pytest.approx(1.0 / green_table_axial.origin_value,
                                      rel=1e-12)
    assert est.method == "equilibrium-solve"
    assert est.std_error == 0.0


def test_two_point_formula(green_table_axial):
    x = (3, 2)
    g0 = green_table_axial.origin_value
    gx, _ = green_table_axial.value_and_error(x)
    est = equilibrium_capacity([(0, 0), x], green_table_axial)
    assert est.value == pytest.approx(2.0 / (g0 + gx), rel=1e-12)


def test_translation_invariance(green_table_axial):
    a = equilibrium_capacity([(0, 0), (2, 1), (-1, 3)], green_table_axial)
    b = equilibrium_capacity([(5, -2), (7, -1), (4, 1)], green_table_axial)
    assert a.value == pytest.approx(b.value, abs=1e-14)


def test_monotone_under_inclusion(green_table_axial):
    rng = np.random.default_rng(1)
    for _ in range(200):
        base = rng.integers(-4, 5, (int(rng.integers(1, 5)), 2))
        extra = rng.integers(-4, 5, (int(rng.integers(1, 4)), 2))
        bigger = np.vstack([base, extra])
        ca = equilibrium_capacity(base, green_table_axial)
        cb = equilibrium_capacity(bigger, green_table_axial)
        slack = ca.propagated_error + cb.propagated_error
        assert ca.value <= cb.value + slack


def test_capacity_at_most_cardinality(green_table_axial):
    rng = np.random.default_rng(2)
    for _ in range(50):
        pts = np.unique(rng.integers(-5, 6, (int(rng.integers(1, 7)), 2)),
                        axis=0)
        est = equilibrium_capacity(pts, green_table_axial)
        assert 0.0 <= est.value <= len(pts) + est.propagated_error


def test_singular_system_refused():
    bad = FakeEvaluator(lambda d: 1.0)  # rank-one matrix
    with pytest.raises(SingularSystemError):
        equilibrium_capacity([(0, 0), (1, 0)], bad)


def test_condition_budget_refused(green_table_axial):
    # nearly singular but PD system with large certified errors
    ev = FakeEvaluator(lambda d: 1.0 if d == (0, 0) else 0.999, err=0.5)
    with pytest.raises(SingularSystemError):
        equilibrium_capacity([(0, 0), (1, 0)], ev)


def test_equilibrium_out_of_range():
    # inconsistent Green values: off-diagonal above diagonal drives a
    # negative equilibrium weight
    def fn(d):
        if d == (0, 0):
            return 1.0
        if d in ((1, 0), (-1, 0)):
            return 0.99
        return 0.9
    ev = FakeEvaluator(fn)
    with pytest.raises((EquilibriumOutOfRangeError, SingularSystemError)):
        equilibrium_capacity([(0, 0), (1, 0), (2, 0)], ev, slack=1e-9)


def test_mc_escape_drift_law_never_returns():
    law = point_step_law(2, (1, 0))
    est = mc_escape_capacity([(0, 0)], law, horizon=50, trials_per_point=200,
                             seed=3, stability=False)
    assert est.value == 1.0
    assert est.std_error == 0.0


def test_mc_escape_value_bounded(axial_law):
    est = mc_escape_capacity([(0, 0), (1, 0), (0, 1)], axial_law, horizon=200,
                             trials_per_point=500, seed=4)
    assert est.value <= 3.0 + 3 * est.std_error
    assert est.stability_gap is not None
    assert est.horizon == 200


def test_mc_matches_equilibrium(axial_law, green_table_axial):
    pts = [(0, 0), (2, -1), (-1, -1), (4, 4)]
    eq = equilibrium_capacity(pts, green_table_axial)
    mc = mc_escape_capacity(pts, axial_law, horizon=3000,
                            trials_per_point=6000, seed=5, stability=False)
    assert abs(mc.value - eq.value) <= 3 * mc.std_error + eq.propagated_error


def test_mc_validates_parameters(axial_law):
    with pytest.raises(InvalidParameterError):
        mc_escape_capacity([(0, 0)], axial_law, horizon=0, trials_per_point=10,
                           seed=0)


def test_capacity_process_trivial_grid(axial_law, green_table_axial):
    cfg = {"method": "equilibrium-solve", "evaluator": green_table_axial}
    sample = capacity_process(axial_law, 16, [0], cfg, seed=6)
    assert sample.cap_values[0] == pytest.approx(
        1.0 / green_table_axial.origin_value, rel=1e-12)


def test_capacity_process_monotone_lipschitz(axial_law, oracle_axial):
    # exact capacities along short paths: C_n <= C_{n+1} <= C_n + 1
    cfg = {"method": "equilibrium-solve", "evaluator": oracle_axial,
           "use_practical_errors": True}
    checked = 0
    for seed in range(40):
        from stablewalk.walks import simulate_path
        path = simulate_path(axial_law, 24, 7000 + seed)
        diam = (path.positions.max(axis=0) - path.positions.min(axis=0)).max()
        if diam > oracle_axial.radius:
            continue
        checked += 1
        caps = []
        errs = []
        for m in range(25):
            est = equilibrium_capacity(path.positions[: m + 1], oracle_axial,
                                       use_practical_errors=True)
            caps.append(est.value)
            errs.append(est.propagated_error)
        caps = np.array(caps)
        tol = np.array(errs)[:-1] + np.array(errs)[1:]
        diff = np.diff(caps)
        assert (diff >= -tol).all()
        assert (diff <= 1.0 + tol).all()
    assert checked >= 20


def test_capacity_of_set_dispatch(axial_law, green_table_axial):
    eq = capacity_of_set([(0, 0)], axial_law,
                         {"method": "equilibrium-solve",
                          "evaluator": green_table_axial}, seed=1)
    assert eq.method == "equilibrium-solve"
    mc = capacity_of_set([(0, 0)], axial_law,
                         {"method": "mc-escape", "horizon": 16,
                          "trials_per_point": 8}, seed=1)
    assert mc.method == "mc-escape"
    with pytest.raises(InvalidParameterError):
        capacity_of_set([(0, 0)], axial_law, {"method": "nope"}, seed=1)


def test_decomposition_far_apart_two_points(green_table_axial):
    g0 = green_table_axial.origin_value
    x = (8, 8)
    gx, _ = green_table_axial.value_and_error(x)
    rep = decomposition_bounds_check([(0, 0)], [x], green_table_axial)
    assert rep["subadditive"] and rep["lower_bound"]
    assert rep["cap_union"] <= 2.0 / g0 + rep["slack"]
    assert rep["cap_union"] >= 2.0 / g0 - 2.0 * gx - rep["slack"]


def test_decomposition_randomized(green_table_axial):
    rng = np.random.default_rng(3)
    for _ in range(60):
        a = rng.integers(-6, 7, (int(rng.integers(1, 9)), 2))
        b = rng.integers(-6, 7, (int(rng.integers(1, 9)), 2))
        rep = decomposition_bounds_check(a, b, green_table_axial)
        assert rep["subadditive"] and rep["lower_bound"]


def test_estimate_uncertainty_helper():
    est = CapacityEstimate(value=1.0, std_error=0.1, method="mc-escape",
                           propagated_error=0.05)
    assert est.total_uncertainty() == pytest.approx(0.35)
