"""Norming sequences and growth envelopes for range/capacity error terms.

For a walk attracted to a stable law, positions scale like
``b(n) = n**(1/alpha) * ell(n)`` with ``ell`` slowly varying.  Two envelope
functions control the error terms of the range and capacity decompositions:
one bounds the expected mutual Green energy of two independent ranges, the
other the expected number of intersection points.  Both are piecewise in
the ratio d/alpha, flattening to a constant once the ratio is large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidParameterError, OutOfRegimeError


@dataclass(frozen=True)
class ScalingSpec:
    """Dimension, stability index, and slowly varying factor.

    ``ell`` is either ("constant", c) or ("log-power", c, gamma); the
    log-power form uses ell(x) = c * (1 + ln x)**gamma so that ell stays
    positive at x = 1.  Shipped samplers all have asymptotically constant
    ell; the log-power form exists for analytic envelope work only.
    """

    d: int
    alpha: float
    ell: tuple = ("constant", 1.0)

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise InvalidParameterError(f"alpha out of range: {self.alpha}")
        if self.d < 1:
            raise InvalidParameterError(f"dimension out of range: {self.d}")
        kind = self.ell[0]
        if kind not in ("constant", "log-power"):
            raise InvalidParameterError(f"unknown ell form {kind!r}")
        if self.ell[1] <= 0:
            raise InvalidParameterError("ell scale must be positive")

    @property
    def ratio(self) -> float:
        return self.d / self.alpha

    def ell_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        kind = self.ell[0]
        if kind == "constant":
            return np.full_like(x, self.ell[1])
        c, gamma = self.ell[1], self.ell[2]
        return c * (1.0 + np.log(np.maximum(x, 1.0))) ** gamma

    def norming(self, x) -> np.ndarray:
        """b(x) = x**(1/alpha) * ell(x)."""
        x = np.asarray(x, dtype=float)
        return x ** (1.0 / self.alpha) * self.ell_at(x)


def _log_sum(spec: ScalingSpec, n: int) -> float:
    """sum_{k<=n} k**-1 * ell(k)**-d, the slowly varying boundary case."""
    k = np.arange(1, int(n) + 1, dtype=float)
    return float(np.sum(1.0 / k / spec.ell_at(k) ** spec.d))


def capacity_overlap_envelope(n: int, spec: ScalingSpec) -> float:
    """Growth envelope for E[G(R_n, R~_n)] of two independent ranges.

    Piecewise in d/alpha: constant above 3, the slowly varying log-type sum
    at 3, and n**3 / b(n)**d between 2 and 3.  Requires d/alpha > 2.
    """
    rho = spec.ratio
    if rho <= 2.0:
        raise OutOfRegimeError(f"capacity overlap envelope needs d/alpha > 2, got {rho}")
    if rho > 3.0:
        return 1.0
    if rho == 3.0:
        return _log_sum(spec, n)
    return float(n) ** 3 / float(spec.norming(n)) ** spec.d


def intersection_envelope(n: int, spec: ScalingSpec) -> float:
    """Growth envelope for E[I_n], the expected common points of two walks.

    Constant above d/alpha = 2, the log-type sum at 2, and n**2 / b(n)**d
    between 1 and 2.  Requires d/alpha > 1.
    """
    rho = spec.ratio
    if rho <= 1.0:
        raise OutOfRegimeError(f"intersection envelope needs d/alpha > 1, got {rho}")
    if rho > 2.0:
        return 1.0
    if rho == 2.0:
        return _log_sum(spec, n)
    return float(n) ** 2 / float(spec.norming(n)) ** spec.d


def growth_exponent(pairs, confidence: float = 0.95):
    """Least-squares slope of log(value) against log(n) with its CI.

    Returns (slope, (lo, hi)).  Values must be positive and at least three
    pairs are required so the residual variance is defined.
    """
    pairs = [(float(n), float(v)) for n, v in pairs]
    if len(pairs) < 3:
        raise InvalidParameterError("need at least 3 pairs for a slope CI")
    if any(v <= 0 for _, v in pairs) or any(n <= 0 for n, _ in pairs):
        raise InvalidParameterError("growth regression needs positive data")
    x = np.log([n for n, _ in pairs])
    y = np.log([v for _, v in pairs])
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    dof = n - 2
    s2 = float(np.sum(resid ** 2) / dof) if dof > 0 else 0.0
    se = np.sqrt(s2 / sxx)
    tq = stats.t.ppf(0.5 + confidence / 2.0, dof)
    return slope, (slope - tq * se, slope + tq * se)
