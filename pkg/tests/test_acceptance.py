"""The acceptance battery as a test module: one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output on failure).  Heavy sample generation is cached under
.cache/ by the runner, so the first full run is expensive (hours: the
escape-probability oracle comparison walks ~10^12 steps) and reruns are
fast.  Run just this module with ``pytest tests/test_acceptance.py -v``.
"""

import pytest

import stablewalk.acceptance as acc


def _check(result):
    status = "PASS" if result["passed"] else "FAIL"
    print(f"[criterion] {result['name']}: {status}")
    assert result["passed"], result["details"]


@pytest.mark.acceptance
def test_criterion_01_green_cross_validation():
    _check(acc.criterion_green_cross_validation())


@pytest.mark.acceptance
def test_criterion_02_capacity_oracle_equivalence():
    _check(acc.criterion_capacity_oracle_equivalence())


@pytest.mark.acceptance
def test_criterion_03_exact_structural_identities():
    _check(acc.criterion_structural_identities())


@pytest.mark.acceptance
def test_criterion_04_capacity_decomposition_bounds():
    _check(acc.criterion_capacity_decomposition())


@pytest.mark.acceptance
def test_criterion_05_variance_linearity():
    _check(acc.criterion_variance_linearity())


@pytest.mark.acceptance
def test_criterion_06_gaussianity():
    _check(acc.criterion_gaussianity())


@pytest.mark.acceptance
def test_criterion_07_finite_dimensional_structure():
    _check(acc.criterion_fdd_structure())


@pytest.mark.acceptance
def test_criterion_08_error_term_scaling():
    _check(acc.criterion_error_term_scaling())


@pytest.mark.acceptance
def test_criterion_09_stopped_increment_proxy():
    _check(acc.criterion_stopped_increments())


@pytest.mark.acceptance
def test_criterion_10_determinism():
    _check(acc.criterion_determinism())
