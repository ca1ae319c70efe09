import numpy as np
import pytest

from stablewalk import LAZY, build_step_law
from stablewalk.errors import (DisplacementRangeError, InvalidParameterError,
                               NonTransientLawError)
from stablewalk.green import (FarFieldEvaluator, GreenTable,
                              build_quadrature_table, canonical_orbit,
                              convolution_green_oracle, cross_green_estimate,
                              mutual_energy, orbit_keys, quadrature_green,
                              _killed_box_oracle, _lazy_spectral_table)
from stablewalk.walks import simulate_path


def test_origin_value_geometric_bound(green_table_axial):
    # G(0,0) >= 1/(1-p0): the loop alone forces this many visits
    tol = green_table_axial.orbit_errors[(0, 0)]
    assert green_table_axial.origin_value >= 4.0 / 3.0 - tol
    assert green_table_axial.origin_value >= 1.0


def test_table_symmetry_and_dominance(green_table_axial):
    tab = green_table_axial
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.integers(-8, 9, 2)
        v1, e1 = tab.value_and_error(x)
        v2, e2 = tab.value_and_error(-x)
        assert v1 == v2 and e1 == e2  # orbit storage is exactly symmetric
        assert v1 <= tab.origin_value + e1 + tab.orbit_errors[(0, 0)]
        assert v1 >= 0


def test_quadrature_against_convolution_oracle(green_table_axial, oracle_axial):
    for key in orbit_keys(6, 2):
        qv = green_table_axial.orbit_values[key]
        qe = green_table_axial.orbit_errors[key]
        ov = oracle_axial.orbit_values[key]
        # oracle values are certified lower bounds
        assert ov <= qv + qe + 1e-10
        # and agree within the oracle's practical deficit estimate
        assert abs(qv - ov) <= qe + oracle_axial.practical_errors[key]


def test_oracle_partial_sums_at_small_horizons(axial_law):
    zero = _killed_box_oracle(axial_law, 24, 0)
    assert zero.origin_value == 1.0  # only the n = 0 term
    one = _killed_box_oracle(axial_law, 24, 1)
    # sum_{n<=1} P(S_n = 0) = 1 + loop_prob exactly
    assert one.origin_value == pytest.approx(1.25, abs=1e-12)
    two = _killed_box_oracle(axial_law, 24, 2)
    p2 = float(two.meta["returns"][2])
    assert two.origin_value == pytest.approx(1.25 + p2, abs=1e-12)
    assert p2 > 0.0625  # loop-loop alone contributes p0^2


def test_strong_transience_partial_sums_stabilize(oracle_axial):
    # sum_{k>=n} p_k(0) must vanish as n grows for a strongly transient law
    returns = np.asarray(oracle_axial.meta["returns"])
    tails = returns[::-1].cumsum()[::-1]
    assert tails[-1] < 1e-3
    assert tails[min(64, len(tails) - 1)] < 0.05


def test_quadrature_requires_transience():
    lazy2 = build_step_law(2, 2, 0.5, LAZY)
    with pytest.raises(NonTransientLawError):
        build_quadrature_table(lazy2, 2, 1e-3)


def test_quadrature_green_convenience(axial_law):
    v, e = quadrature_green(axial_law, (1, 1), tol=1e-4)
    assert e <= 1e-4
    v2, _ = quadrature_green(axial_law, (-1, 1), tol=1e-4)
    assert v == v2


def test_mutual_energy_singletons(green_table_axial):
    g0 = green_table_axial.origin_value
    val, err = mutual_energy([(0, 0)], [(0, 0)], green_table_axial)
    assert val == pytest.approx(g0, abs=1e-12)
    gx, _ = green_table_axial.value_and_error((2, 1))
    val, err = mutual_energy([(0, 0)], [(2, 1)], green_table_axial)
    assert val == pytest.approx(gx, abs=1e-12)


def test_mutual_energy_additive_over_disjoint_sets(green_table_axial):
    a = [(0, 0), (1, 0)]
    b1 = [(2, 2), (3, -1)]
    b2 = [(-4, 0)]
    v_split = (mutual_energy(a, b1, green_table_axial)[0]
               + mutual_energy(a, b2, green_table_axial)[0])
    v_union = mutual_energy(a, b1 + b2, green_table_axial)[0]
    assert v_union == pytest.approx(v_split, rel=1e-14)


def test_mutual_energy_out_of_range(green_table_axial):
    with pytest.raises(DisplacementRangeError):
        mutual_energy([(0, 0)], [(100, 0)], green_table_axial)


def test_far_field_evaluator(oracle_axial, axial_law):
    ev = FarFieldEvaluator(oracle_axial, axial_law)
    vals, errs = ev.values_at(np.array([[0, 0], [400, 0], [0, 2]]))
    assert ev.n_far == 1
    assert errs[1] == vals[1]  # extrapolated entries carry 100% error
    inner, _ = oracle_axial.values_at(np.array([[120, 0]]))
    assert vals[1] < inner[0]  # decaying extrapolation


def test_cross_green_estimate_n0(axial_law, oracle_axial):
    ev = FarFieldEvaluator(oracle_axial, axial_law)
    out = cross_green_estimate(axial_law, 0, 5, 123, evaluator=ev)
    assert out["mean"] == pytest.approx(oracle_axial.origin_value, abs=1e-12)
    assert out["std_error"] == 0.0


def test_cross_energy_monotone_under_coupled_extension(axial_law, oracle_axial):
    ev = FarFieldEvaluator(oracle_axial, axial_law)
    a = simulate_path(axial_law, 64, 7)
    b = simulate_path(axial_law, 64, 8)
    vals = []
    for m in (16, 32, 64):
        an = np.unique(a.positions[: m + 1], axis=0)
        bn = np.unique(b.positions[: m + 1], axis=0)
        vals.append(mutual_energy(an, bn, ev)[0])
    assert vals[0] <= vals[1] <= vals[2]


def test_lazy_routes_agree_same_horizon():
    law = build_step_law(3, 2, 0.5, LAZY)
    spectral = _lazy_spectral_table(law, 2, 1.0, horizon=80)
    axis = convolution_green_oracle(law, 16, 80)
    for key in spectral.orbit_values:
        assert spectral.orbit_values[key] == pytest.approx(
            axis.orbit_values[key], abs=1e-12)


def test_lazy_d6_origin_bound(lazy6_law):
    table = _lazy_spectral_table(lazy6_law, 1, 1e-3)
    assert table.origin_value >= 2.0  # 1/(1 - p0) with p0 = 0.5
    assert table.orbit_errors[(0,) * 6] <= 1e-3


def test_canonical_orbit_and_point_map():
    assert canonical_orbit((-3, 1)) == (1, 3)
    table = GreenTable("fp", 2, 1, "quadrature",
                       {(0, 0): 1.5, (0, 1): 0.5, (1, 1): 0.25},
                       {(0, 0): 0.01, (0, 1): 0.01, (1, 1): 0.01})
    pm = table.point_map()
    assert len(pm) == 9
    assert pm[(-1, 0)][0] == 0.5


def test_tolerance_parameter_validation(axial_law):
    with pytest.raises(InvalidParameterError):
        build_quadrature_table(axial_law, 2, -1.0)


def test_tolerance_unreachable(axial_law):
    from stablewalk.errors import ToleranceUnreachableError
    with pytest.raises(ToleranceUnreachableError):
        build_quadrature_table(axial_law, 2, 1e-12, max_refine=0)


def test_ratio_tail_rejects_nondecaying():
    from stablewalk.errors import BoxTooSmallError
    from stablewalk.green import _ratio_tail_bound
    with pytest.raises(BoxTooSmallError):
        _ratio_tail_bound(0.5, 0.5)
    assert _ratio_tail_bound(0.25, 1.0) == pytest.approx(4 * 0.25 * 0.5 / 0.5)
