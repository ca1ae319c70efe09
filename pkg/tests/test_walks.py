from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablewalk import (build_step_law, decompose_range, floor_times,
                        intersect_count, path_from_steps, point_step_law,
                        range_cardinality_process, simulate_path)
from stablewalk.errors import (DimensionMismatchError, GridError,
                               InsufficientPathError)
from stablewalk.lattice import pack_coords, unpack_coords
from stablewalk.walks import intersection_count_process, validate_grid


def test_zero_steps(axial_law):
    state = simulate_path(axial_law, 0, 1)
    assert state.cardinality == 1
    assert state.position == (0, 0)


def test_deterministic_drift_cardinality():
    law = point_step_law(2, (1, 0))
    state = simulate_path(law, 10, 0)
    assert state.cardinality == 11  # never revisits: |R_n| = n + 1


def test_same_seed_same_range(axial_law):
    a = simulate_path(axial_law, 300, 42)
    b = simulate_path(axial_law, 300, 42)
    assert a.visited == b.visited


def test_range_process_trivial_grid(axial_law):
    sample = range_cardinality_process(axial_law, 16, [0], seed=5)
    assert list(sample.range_values) == [1]


def test_range_process_drift_law():
    law = point_step_law(2, (1, 0))
    sample = range_cardinality_process(law, 100, [0, 0.5, 1.0], seed=3)
    assert list(sample.range_values) == [1, 51, 101]
    assert list(sample.floor_nt) == [0, 50, 100]


def test_grid_validation():
    with pytest.raises(GridError):
        validate_grid([0.5, 1.0])
    with pytest.raises(GridError):
        validate_grid([0, 0.5, 0.5])
    with pytest.raises(GridError):
        validate_grid([])


def test_floor_times_exact_rationals():
    # floats that do not represent the decimal exactly still floor exactly
    floors = floor_times(10, [0, 0.1, 0.3, 0.7, 1.0])
    assert list(floors) == [0, 1, 3, 7, 10]
    floors = floor_times(3, [0, Fraction(1, 3), Fraction(2, 3), 1.0])
    assert list(floors) == [0, 1, 2, 3]


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(1, 997))
def test_floor_difference_inequality(a, b, den):
    # floor(x - y) <= floor(x) - floor(y) <= floor(x - y) + 1 for x >= y >= 0
    x, y = max(a, b), min(a, b)
    lhs = (x - y) // den
    mid = x // den - y // den
    assert lhs <= mid <= lhs + 1


def test_decompose_hand_path():
    path = path_from_steps([+1, -1, +1, +1])
    cm, cs, ov = decompose_range(path, 2, 2)
    assert (cm, cs, ov) == (2, 3, 2)
    assert int(path.cardinality_at(4)) == cm + cs - ov == 3


def test_decompose_degenerate_prefix(axial_law):
    path = simulate_path(axial_law, 50, 7)
    cm, cs, ov = decompose_range(path, 0, 50)
    assert cm == 1 and ov == 1
    assert cs == int(path.cardinality_at(50))


def test_decompose_requires_enough_steps(axial_law):
    path = simulate_path(axial_law, 10, 1)
    with pytest.raises(InsufficientPathError):
        decompose_range(path, 8, 8)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([(1, 0), (-1, 0), (0, 1), (0, -1), (0, 0),
                                 (3, 0), (0, -2)]),
                min_size=2, max_size=60),
       st.data())
def test_decompose_identity_property(steps, data):
    path = path_from_steps(steps)
    m = data.draw(st.integers(0, len(steps)))
    n = len(steps) - m
    cm, cs, ov = decompose_range(path, m, n)
    assert int(path.cardinality_at(m + n)) == cm + cs - ov


def test_decompose_identity_on_heavy_tailed_paths(axial_law):
    for i in range(200):
        path = simulate_path(axial_law, 128, 1000 + i)
        cm, cs, ov = decompose_range(path, 64, 64)
        assert int(path.cardinality_at(128)) == cm + cs - ov


def test_range_increments_at_most_one(axial_law):
    path = simulate_path(axial_law, 500, 9)
    cards = path.cardinality_at(np.arange(501))
    inc = np.diff(cards)
    assert inc.min() >= 0 and inc.max() <= 1


def test_intersection_shared_origin_only():
    still = point_step_law(2, (0, 0))
    a = simulate_path(still, 20, 0)
    b = simulate_path(still, 20, 1)
    assert intersect_count(a, b) == 1
    right = simulate_path(point_step_law(2, (1, 0)), 20, 0)
    left = simulate_path(point_step_law(2, (-1, 0)), 20, 0)
    assert intersect_count(right, left) == 1  # origin only


def test_intersection_dimension_mismatch(axial_law):
    other = simulate_path(point_step_law(1, (1,)), 5, 0)
    mine = simulate_path(axial_law, 5, 0)
    with pytest.raises(DimensionMismatchError):
        intersect_count(mine, other)


def test_intersections_nondecreasing_under_extension(axial_law):
    a = simulate_path(axial_law, 512, 21)
    b = simulate_path(axial_law, 512, 22)
    counts = intersection_count_process(a, b, [32, 64, 128, 256, 512])
    assert all(x <= y for x, y in zip(counts, counts[1:]))


def test_overlap_bounded_by_joint_intersections(axial_law):
    # |R_m ∩ R~_n| <= I_{m+n} pathwise under coupled extension
    for i in range(50):
        a = simulate_path(axial_law, 128, 3000 + i)
        b = simulate_path(axial_law, 128, 4000 + i)
        overlap = len(np.intersect1d(a.prefix_keys(64), b.prefix_keys(64)))
        joint = len(np.intersect1d(a.prefix_keys(128), b.prefix_keys(128)))
        assert overlap <= joint


def test_within_path_overlap_matches_two_walk_law(axial_law):
    """Two-sample KS between |R_m ∩ R~_n| from independent walks and the
    within-path overlap of the decomposition at offset m (m = n = 128)."""
    from scipy.stats import ks_2samp
    m = 5000
    within = np.empty(m)
    between = np.empty(m)
    for i in range(m):
        path = simulate_path(axial_law, 256, 50000 + i)
        _, _, within[i] = decompose_range(path, 128, 128)
        a = simulate_path(axial_law, 128, 60000 + 2 * i)
        b = simulate_path(axial_law, 128, 60001 + 2 * i)
        between[i] = intersect_count(a, b)
    # the within-path segment law equals the two-walk law by the Markov
    # property plus symmetry; overlap counts include the shared point S_m
    assert ks_2samp(within, between).pvalue > 0.01


@given(st.lists(st.tuples(st.integers(-2 ** 25, 2 ** 25),
                          st.integers(-2 ** 25, 2 ** 25)),
                min_size=1, max_size=30))
def test_packing_roundtrip(points):
    arr = np.asarray(points, dtype=np.int64)
    keys = pack_coords(arr, 2)
    back = unpack_coords(keys, 2)
    assert np.array_equal(arr, back)


def test_range_process_increment_bounds(axial_law):
    # increments over [t_i, t_j] cannot exceed floor(n t_j) - floor(n t_i)
    sample = range_cardinality_process(axial_law, 1000,
                                       [0, 0.1, 0.25, 0.6, 1.0], seed=77)
    vals = sample.range_values
    floors = sample.floor_nt
    assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
    for i in range(len(vals) - 1):
        assert vals[i + 1] - vals[i] <= floors[i + 1] - floors[i]
