import numpy as np
import pytest
from scipy.special import zeta

from stablewalk import (AXIAL, LAZY, NOT_IMPLIED, STRONGLY_TRANSIENT,
                        TRANSIENT, build_step_law, check_aperiodicity,
                        point_step_law, transience_class)
from stablewalk.errors import InvalidParameterError
from stablewalk.lattice import generates_full_lattice


def test_axial_construction(axial_law):
    assert axial_law.probability((0, 0)) == 0.25
    # P(xi = r e) proportional to r**(-1-alpha)
    p1 = axial_law.probability((1, 0))
    p3 = axial_law.probability((0, 3))
    assert p3 / p1 == pytest.approx(3.0 ** -1.7, rel=1e-12)
    assert axial_law.probability((1, 1)) == 0.0


def test_lazy_construction(lazy6_law):
    assert lazy6_law.probability((0,) * 6) == 0.5
    e3 = (0, 0, 1, 0, 0, 0)
    assert lazy6_law.probability(e3) == pytest.approx(1 / 24, rel=1e-12)
    assert lazy6_law.probability((0, 0, 2, 0, 0, 0)) == 0.0


@pytest.mark.parametrize("args", [
    (2, 2.5, 0.25, AXIAL),      # alpha out of range
    (2, 0.7, 1.0, AXIAL),       # loop_prob = 1 not allowed
    (0, 1.0, 0.25, AXIAL),      # bad dimension
    (3, 1.5, 0.25, LAZY),       # lazy requires alpha = 2
    (2, 1.0, 0.1, "bogus"),
])
def test_invalid_parameters(args):
    with pytest.raises(InvalidParameterError):
        build_step_law(*args)


def test_total_mass(axial_law):
    r = np.arange(1, 200001, dtype=float)
    truncated = 4 * 0.75 / 4 * np.sum(r ** -1.7) / axial_law.normalizer
    tail = 0.75 * zeta(1.7, 200001.0) / axial_law.normalizer
    assert 0.25 + truncated + tail == pytest.approx(1.0, abs=1e-10)


def test_point_law_always_origin():
    law = point_step_law(2, (0, 0))
    rng = np.random.default_rng(0)
    steps = law.sample_steps(1000, rng)
    assert not steps.any()


def test_sampling_is_deterministic(axial_law):
    a = axial_law.sample_steps(500, np.random.default_rng(99))
    b = axial_law.sample_steps(500, np.random.default_rng(99))
    assert np.array_equal(a, b)


def test_origin_frequency(axial_law):
    n = 1_000_000
    steps = axial_law.sample_steps(n, np.random.default_rng(11))
    freq = np.mean(~steps.any(axis=1))
    se = np.sqrt(0.25 * 0.75 / n)
    assert abs(freq - 0.25) < 3 * se


def test_mean_coordinate_zero_when_mean_exists():
    law = build_step_law(2, 1.5, 0.25, AXIAL)
    n = 1_000_000
    steps = law.sample_steps(n, np.random.default_rng(12))
    # per-coordinate standard error from the empirical second moment
    for j in range(2):
        se = steps[:, j].std() / np.sqrt(n)
        assert abs(steps[:, j].mean()) < 4 * se


def test_histogram_matches_exact_pmf(axial_law):
    n = 1_000_000
    steps = axial_law.sample_steps(n, np.random.default_rng(13))
    pts, counts = np.unique(steps, axis=0, return_counts=True)
    order = np.argsort(-counts)[:50]
    for i in order:
        p = axial_law.probability(tuple(pts[i]))
        se = np.sqrt(p * (1 - p) * n)
        assert abs(counts[i] - p * n) <= 4 * se


def test_negation_invariance(axial_law):
    n = 1_000_000
    steps = axial_law.sample_steps(n, np.random.default_rng(14))
    pts, counts = np.unique(steps, axis=0, return_counts=True)
    lookup = {tuple(p): c for p, c in zip(pts, counts)}
    order = np.argsort(-counts)[:50]
    for i in order:
        z = tuple(pts[i])
        neg = tuple(-c for c in z)
        c_pos = lookup[z]
        c_neg = lookup.get(neg, 0)
        p = axial_law.probability(z)
        se = np.sqrt(2 * p * (1 - p) * n)
        assert abs(c_pos - c_neg) <= 4 * se


def test_fast_sampler_matches_exact_pmf(axial_law):
    fs = axial_law.fast_sampler()
    n = 1_000_000
    steps = fs.sample(n, np.random.default_rng(15))
    for z in [(0, 0), (1, 0), (0, -2), (5, 0), (0, 7)]:
        p = axial_law.probability(z)
        hits = int(((steps[:, 0] == z[0]) & (steps[:, 1] == z[1])).sum())
        se = np.sqrt(p * (1 - p) * n)
        assert abs(hits - p * n) <= 4 * se


def test_fast_sampler_tail_frequency(axial_law):
    fs = axial_law.fast_sampler()
    n = 2_000_000
    steps = fs.sample(n, np.random.default_rng(16))
    frac = np.mean(np.abs(steps).max(axis=1) > 1000)
    exact = 0.75 * zeta(1.7, 1001.0) / axial_law.normalizer
    se = np.sqrt(exact * (1 - exact) / n)
    assert abs(frac - exact) < 4 * se


def test_aperiodicity(axial_law, lazy6_law):
    assert check_aperiodicity(axial_law)
    assert check_aperiodicity(lazy6_law)
    # a law supported on doubled axes generates only 2Z^2
    assert not generates_full_lattice([(2, 0), (-2, 0), (0, 2), (0, -2)], 2)
    assert generates_full_lattice([(1, 0), (0, 1)], 2)
    assert not generates_full_lattice([(1, 0)], 2)


def test_transience_classification():
    assert transience_class(2, 0.7) == STRONGLY_TRANSIENT
    assert transience_class(3, 2.0) == TRANSIENT
    assert transience_class(1, 2.0) == NOT_IMPLIED


def test_transience_monotone_in_dimension():
    rank = {NOT_IMPLIED: 0, TRANSIENT: 1, STRONGLY_TRANSIENT: 2}
    for alpha in (0.3, 0.7, 1.0, 1.5, 2.0):
        classes = [rank[transience_class(d, alpha)] for d in range(1, 9)]
        assert classes == sorted(classes)


def test_radial_tail_inversion_exactness(axial_law):
    # the inverted tail radius is the smallest r with P(R <= r) >= u
    from stablewalk.steps import _RADIAL_CLAMP, _RADIAL_TABLE
    law = axial_law
    u = np.array([1 - 1e-5, 1 - 1e-6, 1 - 1e-7])
    r = law._invert_tail(u)
    z = law.normalizer
    for ui, ri in zip(u, r):
        assert zeta(1.7, ri + 1.0) <= (1 - ui) * z + 1e-18
        assert zeta(1.7, float(ri)) > (1 - ui) * z
        assert _RADIAL_TABLE < ri < _RADIAL_CLAMP
    # beyond the clamp the radius saturates (documented bias < 1e-11/step)
    assert law._invert_tail(np.array([1 - 1e-12]))[0] == _RADIAL_CLAMP
