"""Step-law families on Z^d with exact samplers and structural validators.

Two shipped families:

* ``axial-power-law``: an atom of mass ``loop_prob`` at the origin, the rest
  spread over the 2d axis directions with radial mass proportional to
  r**(-1-alpha).  The radial tail sums are Hurwitz zeta values, so sampling
  inverts the exact discrete tail with no truncation of the law (radii are
  clamped only at 2**40, an event of probability < 1e-11 per step).
* ``lazy-simple``: an atom at the origin plus the uniform law on the 2d unit
  neighbors; requires alpha = 2.  With ``loop_prob = 0`` this is the plain
  simple random walk.

A third, test-only ``point`` family (deterministic single step) is exposed
via :func:`point_step_law`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import InvalidParameterError
from .lattice import generates_full_lattice

AXIAL = "axial-power-law"
LAZY = "lazy-simple"
POINT = "point"

NOT_IMPLIED = "not-implied"

_FAST_SAMPLERS: dict = {}
TRANSIENT = "transient"
STRONGLY_TRANSIENT = "strongly-transient"

# radial CDF table size; beyond it the exact Hurwitz-zeta tail is inverted
_RADIAL_TABLE = 65536
# clamp for inverted radii so positions stay safely inside int64 arithmetic
_RADIAL_CLAMP = 1 << 40


def _radial_tail(alpha: float, r) -> np.ndarray:
    """Unnormalized tail sum_{k>=r} k**(-1-alpha) as a Hurwitz zeta value."""
    return zeta(1.0 + alpha, r)


@dataclass(frozen=True)
class StepLaw:
    """An immutable step distribution on Z^d, shareable across workers."""

    d: int
    alpha: float
    loop_prob: float
    family: str
    normalizer: float
    _radial_cdf: np.ndarray | None = field(default=None, repr=False, compare=False)
    _point_step: tuple | None = field(default=None, repr=False, compare=False)

    # -- exact pmf -----------------------------------------------------

    def radial_prob(self, r) -> np.ndarray:
        """P(radius = r) of the axial radial law (r >= 1)."""
        r = np.asarray(r, dtype=float)
        return r ** (-1.0 - self.alpha) / self.normalizer

    def probability(self, point) -> float:
        """Exact probability of a single step landing on ``point``."""
        point = tuple(int(c) for c in point)
        if len(point) != self.d:
            raise InvalidParameterError("point dimension mismatch")
        nonzero = [(j, c) for j, c in enumerate(point) if c != 0]
        if self.family == POINT:
            return 1.0 if point == self._point_step else 0.0
        if not nonzero:
            return self.loop_prob
        if len(nonzero) > 1:
            return 0.0
        _, c = nonzero[0]
        r = abs(c)
        if self.family == LAZY:
            return (1.0 - self.loop_prob) / (2 * self.d) if r == 1 else 0.0
        return (1.0 - self.loop_prob) / (2 * self.d) * float(self.radial_prob(r))

    def support_points(self, radius: int):
        """All support points with Chebyshev norm <= radius (loop excluded)."""
        pts = []
        for j in range(self.d):
            max_r = radius if self.family == AXIAL else (1 if self.family == LAZY else 0)
            for r in range(1, min(radius, max_r) + 1):
                for s in (1, -1):
                    z = [0] * self.d
                    z[j] = s * r
                    pts.append(tuple(z))
        if self.family == POINT and self._point_step is not None:
            if max(abs(c) for c in self._point_step) <= radius:
                pts.append(self._point_step)
        return pts

    def fingerprint(self) -> str:
        spec = {"d": self.d, "alpha": self.alpha, "loop_prob": self.loop_prob,
                "family": self.family, "point": self._point_step}
        return hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()

    # -- sampling ------------------------------------------------------

    def sample_radii(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Exact inversion sampling of the axial radial law."""
        u = rng.random(count)
        cdf = self._radial_cdf
        r = np.searchsorted(cdf, u, side="left") + 1
        in_tail = r > _RADIAL_TABLE
        if np.any(in_tail):
            r[in_tail] = self._invert_tail(u[in_tail])
        return r.astype(np.int64)

    def _invert_tail(self, u: np.ndarray) -> np.ndarray:
        """Smallest r with P(R <= r) >= u, for u beyond the CDF table.

        Solves zeta(1+alpha, r+1) <= (1-u) * Z by bisection on the exact
        monotone tail; the asymptotic inverse brackets the root.
        """
        target = (1.0 - u) * self.normalizer
        a = self.alpha
        # zeta(1+a, q) ~ q**(-a)/a, so invert that for a starting guess
        guess = np.maximum((target * a) ** (-1.0 / a), float(_RADIAL_TABLE))
        lo = np.maximum(np.floor(guess / 16.0), float(_RADIAL_TABLE))
        hi = np.minimum(np.ceil(guess * 16.0) + 2.0, float(_RADIAL_CLAMP))
        # ensure brackets: g(r) = zeta(1+a, r+1) decreasing; want first r
        # with g(r) <= target
        for _ in range(8):
            bad = _radial_tail(a, lo + 1.0) <= target  # lo already past root
            if not bad.any():
                break
            lo[bad] = np.maximum(lo[bad] / 16.0, 1.0)
        for _ in range(8):
            bad = _radial_tail(a, hi + 1.0) > target  # hi not yet past root
            if not bad.any():
                break
            hi[bad] = np.minimum(hi[bad] * 16.0, float(_RADIAL_CLAMP))
        for _ in range(64):
            mid = np.floor((lo + hi) / 2.0)
            past = _radial_tail(a, mid + 1.0) <= target
            hi = np.where(past, mid, hi)
            lo = np.where(past, lo, mid)
            if np.all(hi - lo <= 1.0):
                break
        return np.minimum(hi, float(_RADIAL_CLAMP)).astype(np.int64)

    def sample_steps(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """An (count, d) int64 array of i.i.d. steps."""
        out = np.zeros((count, self.d), dtype=np.int64)
        if self.family == POINT:
            out[:] = np.asarray(self._point_step, dtype=np.int64)
            return out
        move = rng.random(count) >= self.loop_prob
        n_mv = int(move.sum())
        if n_mv == 0:
            return out
        direction = rng.integers(0, 2 * self.d, n_mv)
        axis = direction >> 1
        sign = np.where(direction & 1, 1, -1).astype(np.int64)
        if self.family == LAZY:
            radius = np.ones(n_mv, dtype=np.int64)
        else:
            radius = self.sample_radii(n_mv, rng)
        rows = np.flatnonzero(move)
        out[rows, axis] = sign * radius
        return out

    def sample_step(self, rng: np.random.Generator) -> tuple:
        """One step as a coordinate tuple."""
        return tuple(int(c) for c in self.sample_steps(1, rng)[0])

    def fast_sampler(self) -> "FastStepSampler":
        """Cached alias-method sampler (hot loops; same exact law)."""
        sampler = _FAST_SAMPLERS.get(id(self))
        if sampler is None:
            sampler = FastStepSampler(self)
            _FAST_SAMPLERS[id(self)] = sampler
        return sampler


def build_step_law(d: int, alpha: float, loop_prob: float, family: str) -> StepLaw:
    """Construct and validate a step law; see module docstring for families."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidParameterError(f"dimension must be a positive integer, got {d}")
    if not (0.0 < alpha <= 2.0):
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if not (0.0 <= loop_prob < 1.0):
        raise InvalidParameterError(f"loop_prob must lie in [0, 1), got {loop_prob}")
    if family == LAZY:
        if alpha != 2.0:
            raise InvalidParameterError("lazy-simple requires alpha = 2")
        return StepLaw(d=int(d), alpha=2.0, loop_prob=float(loop_prob),
                       family=LAZY, normalizer=float(2 * d))
    if family == AXIAL:
        z = float(zeta(1.0 + alpha, 1.0))
        r = np.arange(1, _RADIAL_TABLE + 1, dtype=float)
        pmf = r ** (-1.0 - alpha) / z
        cdf = np.cumsum(pmf)
        return StepLaw(d=int(d), alpha=float(alpha), loop_prob=float(loop_prob),
                       family=AXIAL, normalizer=z, _radial_cdf=cdf)
    raise InvalidParameterError(f"unknown family {family!r}")


def point_step_law(d: int, step) -> StepLaw:
    """Test-only law that always takes the given deterministic step."""
    step = tuple(int(c) for c in step)
    if len(step) != d:
        raise InvalidParameterError("step dimension mismatch")
    return StepLaw(d=int(d), alpha=2.0, loop_prob=0.0, family=POINT,
                   normalizer=1.0, _point_step=step)


def check_aperiodicity(law: StepLaw, radius: int = 4) -> bool:
    """True iff support points within ``radius`` generate Z^d additively."""
    pts = law.support_points(radius)
    return generates_full_lattice(pts, law.d)


def transience_class(d: int, alpha: float) -> str:
    """Classification implied by d and alpha for a stable-like step law.

    Strong transience holds for d > 2*alpha and transience for d > alpha;
    outside those ranges nothing is implied by the dimension alone.
    """
    if not (0.0 < alpha <= 2.0):
        raise InvalidParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if d > 2 * alpha:
        return STRONGLY_TRANSIENT
    if d > alpha:
        return TRANSIENT
    return NOT_IMPLIED


class FastStepSampler:
    """Walker-alias sampler over (loop | direction x radius) outcomes.

    One 63-bit draw per step: low bits pick the padded alias slot, high
    bits form the acceptance fraction.  Radii above the alias cutoff fall
    into per-direction tail slots resolved by the exact zeta-tail
    inversion, so the sampled law is exactly the step law.
    """

    _CUTOFF = 256

    def __init__(self, law: StepLaw):
        self.law = law
        d = law.d
        if law.family == POINT:
            raise InvalidParameterError("no fast path for the point law")
        cut = self._CUTOFF if law.family == AXIAL else 1
        probs = [law.loop_prob]
        steps = [np.zeros(d, dtype=np.int64)]
        tail_flag = [False]
        tail_dir = [0]
        mass_dir = (1.0 - law.loop_prob) / (2 * d)
        for axis in range(d):
            for sign in (1, -1):
                vec = np.zeros(d, dtype=np.int64)
                if law.family == AXIAL:
                    radial = law.radial_prob(np.arange(1, cut + 1, dtype=float))
                    for r in range(1, cut + 1):
                        vec = np.zeros(d, dtype=np.int64)
                        vec[axis] = sign * r
                        probs.append(mass_dir * radial[r - 1])
                        steps.append(vec)
                        tail_flag.append(False)
                        tail_dir.append(0)
                    tail_mass = mass_dir * float(
                        _radial_tail(law.alpha, cut + 1.0) / law.normalizer)
                    vec = np.zeros(d, dtype=np.int64)
                    vec[axis] = sign  # placeholder, radius resolved later
                    probs.append(tail_mass)
                    steps.append(vec)
                    tail_flag.append(True)
                    tail_dir.append(sign * (axis + 1))
                else:
                    vec[axis] = sign
                    probs.append(mass_dir)
                    steps.append(vec)
                    tail_flag.append(False)
                    tail_dir.append(0)
        probs = np.asarray(probs)
        k = len(probs)
        kpad = 1 << int(np.ceil(np.log2(k)))
        self.kpad = kpad
        full = np.zeros(kpad)
        full[:k] = probs / probs.sum()
        self.accept, self.alias = _vose_tables(full)
        step_table = np.zeros((kpad, d), dtype=np.int64)
        step_table[:k] = np.asarray(steps)
        self.coord_tables = [np.ascontiguousarray(step_table[:, j])
                             for j in range(d)]
        self.tail_mask = np.zeros(kpad, dtype=bool)
        self.tail_mask[:k] = tail_flag
        self.tail_dir = np.zeros(kpad, dtype=np.int64)
        self.tail_dir[:k] = tail_dir
        self.tail_lo = float(law._radial_cdf[cut - 1]) if law.family == AXIAL else 1.0

    def sample_coords(self, count: int, rng: np.random.Generator) -> list:
        """d arrays of per-coordinate steps, exactly law-distributed."""
        bits = rng.integers(0, 1 << 63, count, dtype=np.int64)
        idx = bits & (self.kpad - 1)
        frac = (bits >> 9).astype(np.float64) * 2.0 ** -54
        pick = np.where(frac < self.accept[idx], idx, self.alias[idx])
        out = [tab[pick] for tab in self.coord_tables]
        tails = self.tail_mask[pick]
        if tails.any():
            rows = np.flatnonzero(tails)
            # conditional law of the radius beyond the cutoff
            u = self.tail_lo + rng.random(len(rows)) * (1.0 - self.tail_lo)
            cdf = self.law._radial_cdf
            radii = np.searchsorted(cdf, u, side="left").astype(np.int64) + 1
            ultra = radii > len(cdf)
            if ultra.any():
                radii[ultra] = self.law._invert_tail(u[ultra])
            code = self.tail_dir[pick[rows]]
            axis = np.abs(code) - 1
            signed = np.sign(code) * radii
            for j in range(len(out)):
                sel = axis == j
                if sel.any():
                    out[j][rows[sel]] = signed[sel]
        return out

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """(count, d) int64 steps, exactly law-distributed."""
        return np.stack(self.sample_coords(count, rng), axis=1)


def _vose_tables(p: np.ndarray):
    """Walker alias tables: accept[i] in [0,1], alias[i] slot index."""
    k = len(p)
    accept = np.zeros(k)
    alias = np.arange(k)
    scaled = p * k
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large + small:
        accept[i] = 1.0
    return accept, alias
