"""Statistical reports for the Gaussian limit checks.

All reports are plain dataclass records with named tolerances, built from
in-memory sample collections; everything is deterministic given (inputs,
seed).  The Kolmogorov-Smirnov p-value is parametric-bootstrap calibrated
because the samples are studentized with estimated location and scale,
which invalidates the textbook critical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import (DegenerateSampleError, InsufficientReplicasError,
                     InvalidParameterError, StopTimeError)


@dataclass
class TestReport:
    """Named statistics, p-values, verdicts, and the tolerances they used."""

    name: str
    statistics: dict = field(default_factory=dict)
    p_values: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    sample_size: int = 0
    sigma_hat: float | None = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistics": {k: float(v) for k, v in self.statistics.items()},
            "p_values": {k: float(v) for k, v in self.p_values.items()},
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
            "sample_size": int(self.sample_size),
            "sigma_hat": None if self.sigma_hat is None else float(self.sigma_hat),
        }


def _ks_to_standard_normal(z: np.ndarray) -> float:
    z = np.sort(z)
    n = len(z)
    cdf = sps.norm.cdf(z)
    up = np.max(np.arange(1, n + 1) / n - cdf)
    lo = np.max(cdf - np.arange(0, n) / n)
    return float(max(up, lo))


def studentized_ks(samples: np.ndarray) -> float:
    """KS distance of studentized samples to the standard normal."""
    samples = np.asarray(samples, dtype=float)
    sd = samples.std(ddof=1)
    if sd == 0:
        raise DegenerateSampleError("zero-variance sample")
    return _ks_to_standard_normal((samples - samples.mean()) / sd)


def normality_report(samples, seed=0, bootstrap: int = 500,
                     p_floor: float = 0.01,
                     skew_tol: float = 0.15,
                     kurt_tol: float = 0.35) -> TestReport:
    """Studentized KS against the normal with a bootstrap p-value.

    Also reports sample skewness and excess kurtosis with asymptotic 99%
    confidence intervals; those verdicts require the point estimate inside
    (-tol, tol) and the interval to cover zero.
    """
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    if n < 100:
        raise InsufficientReplicasError(f"need >= 100 samples, got {n}")
    d_obs = studentized_ks(samples)

    rng = np.random.default_rng(seed)
    boots = rng.standard_normal((bootstrap, n))
    means = boots.mean(axis=1, keepdims=True)
    sds = boots.std(axis=1, ddof=1, keepdims=True)
    exceed = 0
    for row in (boots - means) / sds:
        if _ks_to_standard_normal(row) >= d_obs:
            exceed += 1
    p_value = (exceed + 1) / (bootstrap + 1)

    skew = float(sps.skew(samples))
    kurt = float(sps.kurtosis(samples))  # excess
    se_skew = float(np.sqrt(6.0 / n))
    se_kurt = float(np.sqrt(24.0 / n))
    z99 = float(sps.norm.ppf(0.995))

    report = TestReport(name="normality", sample_size=n)
    report.statistics = {
        "ks_distance": d_obs,
        "skewness": skew,
        "excess_kurtosis": kurt,
        "skewness_se": se_skew,
        "kurtosis_se": se_kurt,
    }
    report.p_values = {"ks_bootstrap": p_value}
    report.tolerances = {"p_floor": p_floor, "skew_tol": skew_tol,
                         "kurt_tol": kurt_tol, "ci_level": 0.99}
    report.verdicts = {
        "ks": p_value > p_floor,
        "skewness": abs(skew) < skew_tol and abs(skew) <= z99 * se_skew,
        "kurtosis": abs(kurt) < kurt_tol and abs(kurt) <= z99 * se_kurt,
    }
    return report


# ---------------------------------------------------------------------------
# finite-dimensional structure
# ---------------------------------------------------------------------------

def estimate_sigma(values_at_tmax, n: int, t_max: float) -> float:
    """Diffusive scale estimate: sample std at the largest time / sqrt(n*t)."""
    sd = float(np.std(values_at_tmax, ddof=1))
    if sd == 0:
        raise DegenerateSampleError("zero variance at the largest grid time")
    return sd / np.sqrt(n * t_max)


def fdd_covariance_report(values, n: int, t_grid, seed=0,
                          rel_tol: float = 0.15, bootstrap: int = 200,
                          ci_level: float = 0.99,
                          min_replicas: int = 500) -> TestReport:
    """Empirical covariance of the normalized process against min(s, t).

    ``values`` is an (M, k) array of raw process values at the positive
    grid times ``t_grid``.  After dividing by sigma_hat**2 * n the
    replica covariance of entry (i, j) should approach min(t_i, t_j); the
    verdict per entry holds when the bootstrap CI intersects the band
    min(t_i,t_j) * (1 -+ rel_tol).
    """
    values = np.asarray(values, dtype=float)
    m, k = values.shape
    if m < min_replicas:
        raise InsufficientReplicasError(f"need >= {min_replicas} replicas, got {m}")
    t = np.asarray(t_grid, dtype=float)
    if k != len(t) or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise InvalidParameterError("grid must be positive, increasing, length k")

    def normalized_cov(v):
        sig2 = np.var(v[:, -1], ddof=1) / (n * t[-1])
        return np.cov(v, rowvar=False) / (sig2 * n)

    cov = normalized_cov(values)
    target = np.minimum.outer(t, t)

    rng = np.random.default_rng(seed)
    boot_cov = np.empty((bootstrap, k, k))
    for b in range(bootstrap):
        idx = rng.integers(0, m, m)
        boot_cov[b] = normalized_cov(values[idx])
    lo_q = (1.0 - ci_level) / 2.0
    ci_lo = np.quantile(boot_cov, lo_q, axis=0)
    ci_hi = np.quantile(boot_cov, 1.0 - lo_q, axis=0)

    band_lo = target * (1.0 - rel_tol)
    band_hi = target * (1.0 + rel_tol)
    entry_ok = (ci_hi >= band_lo) & (ci_lo <= band_hi)

    sigma_hat = float(np.sqrt(np.var(values[:, -1], ddof=1) / (n * t[-1])))
    report = TestReport(name="fdd-covariance", sample_size=m, sigma_hat=sigma_hat)
    worst = float(np.max(np.abs(cov - target) / target))
    report.statistics = {"max_relative_deviation": worst}
    for i in range(k):
        for j in range(i, k):
            report.statistics[f"cov_{t[i]:g}_{t[j]:g}"] = float(cov[i, j])
    report.tolerances = {"rel_tol": rel_tol, "ci_level": ci_level}
    report.verdicts = {"all_entries": bool(entry_ok.all())}
    for i in range(k):
        for j in range(i, k):
            report.verdicts[f"entry_{t[i]:g}_{t[j]:g}"] = bool(entry_ok[i, j])
    return report


def cramer_wold_projection(values, n: int, t_grid, coefficients,
                           center=None, sigma_hat=None) -> np.ndarray:
    """Per-replica linear projections of the normalized process.

    ``values`` is (M, k) at positive grid times; ``coefficients`` has
    length k.  Centering uses the supplied empirical means (ideally from an
    independent replica pool) or the column means of ``values``.
    """
    values = np.asarray(values, dtype=float)
    coeffs = np.asarray(coefficients, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(coeffs):
        raise InvalidParameterError(
            f"coefficient length {len(coeffs)} != grid length {values.shape[1]}")
    t = np.asarray(t_grid, dtype=float)
    if center is None:
        center = values.mean(axis=0)
    center = np.asarray(center, dtype=float)
    if sigma_hat is None:
        sigma_hat = estimate_sigma(values[:, -1], n, float(t[-1]))
    x = (values - center) / (sigma_hat * np.sqrt(n))
    return x @ coeffs


# ---------------------------------------------------------------------------
# stopped-increment probe (tightness proxy)
# ---------------------------------------------------------------------------

FIXED_TIME = "fixed-time"
LEVEL_CROSSING = "level-crossing"


def apply_stop_rule(times, x_paths, rule) -> np.ndarray:
    """Grid index of the stopping time for each replica path.

    Rules: ("fixed-time", t_star) stops every path at t_star;
    ("level-crossing", level, t_cap) stops at the first grid time where the
    path reaches ``level``, capped at t_cap so the rule stays bounded.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(x_paths, dtype=float)
    kind = rule[0]
    if kind == FIXED_TIME:
        t_star = float(rule[1])
        idx = int(np.argmin(np.abs(times - t_star)))
        if not np.isclose(times[idx], t_star):
            raise StopTimeError(f"fixed time {t_star} not on the sampled grid")
        return np.full(len(x), idx, dtype=np.int64)
    if kind == LEVEL_CROSSING:
        level = float(rule[1])
        t_cap = float(rule[2])
        cap_idx = int(np.argmin(np.abs(times - t_cap)))
        if not np.isclose(times[cap_idx], t_cap):
            raise StopTimeError(f"cap time {t_cap} not on the sampled grid")
        hits = x >= level
        out = np.full(len(x), cap_idx, dtype=np.int64)
        any_hit = hits.any(axis=1)
        first = np.argmax(hits, axis=1)
        out[any_hit] = np.minimum(first[any_hit], cap_idx)
        return out
    raise InvalidParameterError(f"unknown stop rule {kind!r}")


def stopped_increments(times, x_paths, stop_idx, h_values) -> dict:
    """|X_{T+h} - X_T| per replica for each h, from a rectangular grid.

    Every T + h must land on the sampled grid (within rounding): the caller
    chooses the grid so this holds instead of interpolating.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(x_paths, dtype=float)
    rows = np.arange(len(x))
    out = {}
    for h in h_values:
        shifted = times[stop_idx] + float(h)
        if np.any(shifted > times[-1] + 1e-12):
            raise StopTimeError(f"T + {h} exceeds the sampled horizon")
        target_idx = np.searchsorted(times, shifted - 1e-9)
        if np.any(np.abs(times[target_idx] - shifted) > 1e-9):
            raise StopTimeError(f"T + {h} does not land on the sampled grid")
        out[float(h)] = np.abs(x[rows, target_idx] - x[rows, stop_idx])
    return out


def stopped_increment_report(h_values, increments: dict, epsilon: float,
                             ceiling: float, rule_name: str) -> TestReport:
    """Estimates of P(|X_{T+h} - X_T| >= eps) over a decreasing h ladder.

    This probes two shipped stopping rules only; it is a proxy for the
    universally quantified tightness condition, and is labeled as such.
    The verdict needs the estimates nonincreasing along the ladder and the
    smallest-h estimate below ``ceiling``.
    """
    h_values = [float(h) for h in h_values]
    if any(b >= a for a, b in zip(h_values, h_values[1:])):
        raise InvalidParameterError("h ladder must be strictly decreasing")
    probs = []
    m = None
    for h in h_values:
        delta = np.asarray(increments[h], dtype=float)
        m = len(delta)
        probs.append(float(np.mean(delta >= epsilon)))
    report = TestReport(name=f"stopped-increment-proxy[{rule_name}]",
                        sample_size=m)
    for h, p in zip(h_values, probs):
        report.statistics[f"p_h={h:g}"] = p
    report.tolerances = {"epsilon": epsilon, "ceiling": ceiling}
    report.verdicts = {
        "nonincreasing": all(b <= a + 1e-12 for a, b in zip(probs, probs[1:])),
        "smallest_h_below_ceiling": probs[-1] < ceiling,
    }
    return report
