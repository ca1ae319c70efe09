"""Certified evaluation of per-axis characteristic series.

For the axial family the characteristic function is
``phi(theta) = p0 + (1-p0)/d * sum_i psi(theta_i)`` with
``psi(t) = sum_{r>=1} p_r cos(r t)`` and ``p_r ∝ r**(-1-alpha)``.  Direct
summation of psi converges far too slowly near t = 0, so psi is evaluated
through the polylogarithm expansion

    sum_r r**(-1-a) cos(rt)
        = Gamma(-a) cos(pi a/2) t**a + sum_m (-1)**m zeta(1+a-2m) t**(2m)/(2m)!

valid on (0, 2*pi) for non-integer a.  Via the zeta functional equation,

    zeta(1+a-2m) = (-1)**m cos(pi a/2) * 2 (2 pi)**(a-2m) Gamma(2m-a) zeta(2m-a)

for m >= 1, so every series coefficient carries the same sign and an
explicit product form; truncation remainders are certified by a geometric
bound with ratio at most (t / 2 pi)**2 times an explicit factor.  All
functions here return (value, error) pairs or certified interval bounds;
the quadrature error control downstream relies on these being true bounds.

Near a = 1 the singular term and the m = 1 term cancel catastrophically
(the expansion has a removable pole there), so the series model requires
|a - 1| >= 0.05; a = 1 itself uses the exact closed form
``sum_r cos(rt)/r**2 = pi**2/6 - pi t/2 + t**2/4``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln, zeta

from .errors import InvalidParameterError

_M_MAX = 60
_TWO_PI = 2.0 * np.pi


def zeta_any(s: float) -> float:
    """Riemann zeta for s > 0, s != 1 (scipy only covers s > 1).

    For s in (0, 1) uses the eta relation with Cohen-Rodriguez
    Villegas-Zagier acceleration of the alternating series.
    """
    if s > 1.0:
        return float(zeta(s, 1.0))
    n = 32
    d = (3.0 + np.sqrt(8.0)) ** n
    d = (d + 1.0 / d) / 2.0
    b, c, total = -1.0, -d, 0.0
    for k in range(n):
        c = b - c
        total += c * (k + 1.0) ** (-s)
        b *= (k + n) * (k - n) / ((k + 0.5) * (k + 1.0))
    eta = total / d
    return float(eta / (1.0 - 2.0 ** (1.0 - s)))


class AxialCharModel:
    """Certified psi, psi', psi'' for the power-law radial series."""

    def __init__(self, alpha: float):
        if not (0.0 < alpha < 2.0):
            raise InvalidParameterError(
                f"axial char model needs alpha in (0, 2), got {alpha}")
        if alpha != 1.0 and abs(alpha - 1.0) < 0.05:
            raise InvalidParameterError(
                "axial char model is numerically unstable for alpha within "
                "0.05 of 1; use alpha = 1 exactly (closed form) or move away")
        self.alpha = float(alpha)
        self.zeta_norm = float(zeta(1.0 + alpha, 1.0))
        if alpha == 1.0:
            return
        a = self.alpha
        self.cos_half = float(np.cos(np.pi * a / 2.0))
        # positive coefficient of t**alpha in Z * (1 - psi)
        self.a_star = float(-gamma_fn(-a) * self.cos_half)
        m = np.arange(1, _M_MAX + 1, dtype=float)
        # stable form of 2 (2 pi)**(a-2m) Gamma(2m-a) zeta(2m-a) / (2m-o)!
        self._log_gamma_2m = gammaln(2 * m - a)
        self._zeta_2m = np.array([zeta_any(2 * mi - a) for mi in m])
        self._m = m

    def _series(self, t: np.ndarray, order: int, absolute: bool = False):
        """sum_{m>=1} kappa_m d^o/dt^o [t^(2m)] / (2m)! and its remainder.

        With ``absolute`` the magnitudes |kappa_m| are summed instead (for
        interval bounds); only the m = 1 coefficient can be negative (it
        carries zeta(2 - alpha) < 0 when alpha > 1).  Remainders are
        certified by the geometric term-ratio bound.  Requires
        0 < t <= pi elementwise.
        """
        t = np.asarray(t, dtype=float)
        a = self.alpha
        x = t / _TWO_PI
        total = np.zeros_like(t)
        term = np.zeros_like(t)
        last_m = _M_MAX
        for i, m in enumerate(self._m):
            p = 2 * m - order
            log_coef = (np.log(2.0) + a * np.log(_TWO_PI)
                        + self._log_gamma_2m[i] - gammaln(p + 1.0)
                        - order * np.log(_TWO_PI))
            z_i = abs(self._zeta_2m[i]) if absolute else self._zeta_2m[i]
            term = np.exp(log_coef) * z_i * x ** p
            total += term
            if m >= 5 and float(np.abs(term).max())                     < 1e-18 * max(float(np.abs(total).max()), 1e-300):
                last_m = m
                break
        # certified geometric remainder from the term ratio bound
        mm = last_m
        factor = {0: 1.0,
                  1: 1.0,
                  2: (2 * mm + 1) / (2 * mm - 1)}[order]
        rho = float(np.max(x) ** 2) * factor
        rho = min(rho, 0.7)
        rem = np.abs(term) * rho / (1.0 - rho)
        return total, rem

    def one_minus_psi(self, t):
        """(1 - psi)(t) with certified absolute error, t in (0, pi]."""
        t = np.asarray(t, dtype=float)
        if self.alpha == 1.0:
            val = t * (_TWO_PI - t) / 4.0 / self.zeta_norm
            return val, np.full_like(val, 1e-15)
        s, rem = self._series(t, 0)
        sing = self.a_star * t ** self.alpha
        val = (sing - self.cos_half * s) / self.zeta_norm
        err = ((np.abs(self.cos_half) * rem)
               + 3e-15 * (np.abs(sing) + np.abs(s) + 1.0)) / self.zeta_norm
        return val, err

    def upper_one_minus_psi(self, t):
        """Certified upper bound on (1 - psi)(t)."""
        t = np.asarray(t, dtype=float)
        if self.alpha == 1.0:
            return t * (_TWO_PI - t) / 4.0 / self.zeta_norm + 1e-15
        s, rem = self._series(t, 0, absolute=True)
        return (self.a_star * t ** self.alpha
                + np.abs(self.cos_half) * (s + rem)) / self.zeta_norm + 1e-15

    def dpsi_max(self, lo, hi):
        """Certified max of |psi'| over [lo, hi] subset of (0, pi]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.alpha == 1.0:
            return (np.pi - lo) / 2.0 / self.zeta_norm + 1e-15
        a = self.alpha
        edge = lo if a < 1.0 else hi
        sing = a * self.a_star * edge ** (a - 1.0)
        s, rem = self._series(hi, 1, absolute=True)
        return (sing + np.abs(self.cos_half) * (s + rem)) / self.zeta_norm + 1e-15

    def d2psi_max(self, lo, hi):
        """Certified max of |psi''| over [lo, hi] subset of (0, pi]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.alpha == 1.0:
            out = np.full(np.broadcast(lo, hi).shape, 0.5 / self.zeta_norm + 1e-15)
            return out
        a = self.alpha
        sing = a * abs(1.0 - a) * self.a_star * lo ** (a - 2.0)
        s, rem = self._series(hi, 2, absolute=True)
        return (sing + np.abs(self.cos_half) * (s + rem)) / self.zeta_norm + 1e-15

    def min_one_minus_psi(self, lo: float, hi: float, pieces: int = 64) -> float:
        """Certified min of (1 - psi) over [lo, hi], 0 < lo < hi <= pi.

        Log-spaced subdivision with per-piece Lipschitz control; the grid
        spacing tracks the t**(alpha-1) blowup of psi' near zero.
        """
        edges = np.exp(np.linspace(np.log(lo), np.log(hi), pieces + 1))
        vals, errs = self.one_minus_psi(edges)
        lows = vals - errs
        lips = self.dpsi_max(edges[:-1], edges[1:])
        widths = edges[1:] - edges[:-1]
        piece_min = np.minimum(lows[:-1], lows[1:]) - lips * widths / 2.0
        return float(max(0.0, piece_min.min()))


class LazyCharModel:
    """Exact psi = cos(t) of the nearest-neighbor radial law."""

    alpha = 2.0
    zeta_norm = 1.0

    def one_minus_psi(self, t):
        t = np.asarray(t, dtype=float)
        val = 1.0 - np.cos(t)
        return val, np.full_like(val, 4e-16)

    def upper_one_minus_psi(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 - np.cos(t) + 4e-16

    def dpsi_max(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        covers_peak = (lo <= np.pi / 2) & (hi >= np.pi / 2)
        return np.where(covers_peak, 1.0,
                        np.maximum(np.abs(np.sin(lo)), np.abs(np.sin(hi)))) + 4e-16

    def d2psi_max(self, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return np.maximum(np.abs(np.cos(lo)), np.abs(np.cos(hi))) + 4e-16

    def min_one_minus_psi(self, lo: float, hi: float, pieces: int = 0) -> float:
        # 1 - cos is increasing on [0, pi]
        return float(1.0 - np.cos(lo))


def char_model_for(law):
    """The per-axis series model matching a step law's family."""
    from .steps import AXIAL, LAZY
    if law.family == LAZY:
        return LazyCharModel()
    if law.family == AXIAL:
        if law.alpha == 2.0:
            raise InvalidParameterError(
                "certified char series not implemented for axial alpha = 2")
        return AxialCharModel(law.alpha)
    raise InvalidParameterError(f"no char model for family {law.family!r}")
