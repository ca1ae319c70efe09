"""Capacities of finite lattice sets.

Two estimators cross-validate each other:

* ``equilibrium_capacity`` solves the dense symmetric system
  ``sum_y G(x, y) e(y) = 1`` over the set and returns the total equilibrium
  mass (the last-exit identity for symmetric transient walks).  Green errors
  propagate through the solve as |e|^T E |e| to first order, and results are
  refused when the condition number would amplify them past 1e-2.

* ``mc_escape_capacity`` estimates each point's probability of not
  returning to the set within a finite horizon by direct simulation; the
  truncation can only overcount escapes, so the estimate upper-bounds the
  capacity in expectation.  A quarter-trials run at twice the horizon (the
  same step budget split in half) reports a doubling-stability gap instead
  of pretending the truncation bias is certified.

Escape trials use one dedicated random stream per set point, keyed by the
packed point coordinates, so estimates for a growing family of sets are
positively coupled (common random numbers): capacity increments along a
path suffer far less estimator noise than independent streams would give.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (EquilibriumOutOfRangeError, InvalidParameterError,
                     SingularSystemError)
from .lattice import pack_coords
from .steps import StepLaw
from .walks import RangeState, ProcessSample, floor_times, validate_grid

EQUILIBRIUM = "equilibrium-solve"
MC_ESCAPE = "mc-escape"


@dataclass
class CapacityEstimate:
    """A capacity value with method tag and uncertainty metadata."""

    value: float
    std_error: float
    method: str
    horizon: int | None = None
    stability_gap: float | None = None
    propagated_error: float = 0.0
    condition: float | None = None

    def total_uncertainty(self, n_se: float = 3.0) -> float:
        return n_se * self.std_error + self.propagated_error


def _as_points(points, d: int | None = None) -> np.ndarray:
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                     dtype=np.int64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.size == 0:
        raise InvalidParameterError("capacity of the empty set is 0 by "
                                    "convention; pass cap_empty() instead")
    pts = np.unique(pts, axis=0)
    if d is not None and pts.shape[1] != d:
        raise InvalidParameterError("point dimension mismatch")
    return pts


def cap_empty() -> CapacityEstimate:
    """Cap(empty set) = 0, consistent with the defining empty sum."""
    return CapacityEstimate(value=0.0, std_error=0.0, method=EQUILIBRIUM)


def equilibrium_capacity(points, evaluator, slack: float = 1e-6,
                         condition_budget: float = 1e-2,
                         use_practical_errors: bool = False,
                         solver_cap: int = 1024) -> CapacityEstimate:
    """Exact capacity by the equilibrium linear system.

    ``evaluator`` supplies certified Green values; with
    ``use_practical_errors`` the sharper uncertified error estimates of a
    convolution table drive the propagated bound instead (flagged use only:
    the certified bounds of a heavily killed box are honest but enormous).
    """
    pts = _as_points(points)
    n, d = pts.shape
    if n > solver_cap:
        raise InvalidParameterError(f"set size {n} exceeds solver cap {solver_cap}")
    deltas = (pts[None, :, :] - pts[:, None, :]).reshape(-1, d)
    vals, errs = evaluator.values_at(deltas)
    gmat = vals.reshape(n, n)
    emat = errs.reshape(n, n)
    if use_practical_errors and hasattr(evaluator, "practical_error"):
        emat = np.array([evaluator.practical_error(dx) for dx in deltas]
                        ).reshape(n, n)
    try:
        factor = cho_factor(gmat)
    except LinAlgError as exc:
        raise SingularSystemError(
            "equilibrium system is not positive definite; Green errors too "
            "large or law not transient") from exc
    ones = np.ones(n)
    weights = cho_solve(factor, ones)
    condition = float(np.linalg.cond(gmat))
    max_err = float(emat.max())
    if condition * max_err > condition_budget:
        raise SingularSystemError(
            f"condition {condition:.2e} x Green error {max_err:.2e} exceeds "
            f"budget {condition_budget:.0e}; refusing to report")
    if weights.min() < -slack or weights.max() > 1.0 + slack:
        raise EquilibriumOutOfRangeError(
            f"equilibrium weights outside [0,1] beyond slack {slack}: "
            f"range [{weights.min():.3e}, {weights.max():.3e}]")
    weights = np.clip(weights, 0.0, 1.0)
    absw = np.abs(weights)
    propagated = float(absw @ emat @ absw)
    return CapacityEstimate(value=float(weights.sum()), std_error=0.0,
                            method=EQUILIBRIUM, propagated_error=propagated,
                            condition=condition)


# ---------------------------------------------------------------------------
# Monte Carlo escape estimation
# ---------------------------------------------------------------------------

def _point_stream(seed, key: int) -> Generator:
    return Generator(Philox(SeedSequence((int(seed) & (2 ** 63 - 1), int(key) & (2 ** 63 - 1)))))


_seed_memo: dict = {}


def _derived_seed(seed, key: int) -> int:
    """Memoized per-point kernel seed (the derivation itself is fixed)."""
    sk = (int(seed) & (2 ** 63 - 1), key & (2 ** 63 - 1))
    hit = _seed_memo.get(sk)
    if hit is None:
        if len(_seed_memo) > 4_000_000:
            _seed_memo.clear()
        hit = int(SeedSequence(sk).generate_state(1)[0])
        _seed_memo[sk] = hit
    return hit


def _membership(a_keys: np.ndarray, a_box, pos: np.ndarray,
                d: int) -> np.ndarray:
    """Which positions lie in the set; positions outside the set's bounding
    box are rejected before packing (huge excursions cannot overflow)."""
    lo, hi = a_box
    inbox = np.ones(len(pos), dtype=bool)
    for j in range(d):
        inbox &= (pos[:, j] >= lo[j]) & (pos[:, j] <= hi[j])
    hits = np.zeros(len(pos), dtype=bool)
    if inbox.any():
        keys = pack_coords(pos[inbox], d)
        idx = np.searchsorted(a_keys, keys)
        idx[idx == len(a_keys)] = len(a_keys) - 1
        hits[inbox] = a_keys[idx] == keys
    return hits


def _escape_fraction_block(law: StepLaw, a_keys: np.ndarray, a_box,
                           start: np.ndarray, horizon: int, trials: int,
                           rng: Generator) -> float:
    """Fraction of trials from ``start`` that avoid the set up to horizon.

    Full-cumsum engine for short horizons: all positions materialized at
    once, membership checked against the sorted packed keys.
    """
    steps = law.sample_steps(trials * horizon, rng).reshape(trials, horizon, law.d)
    pos = np.cumsum(steps, axis=1)
    pos += start
    hit = _membership(a_keys, a_box, pos.reshape(-1, law.d),
                      law.d).reshape(trials, horizon).any(axis=1)
    return float(1.0 - hit.mean())


def _escape_fraction_long(law: StepLaw, a_keys: np.ndarray, a_box,
                          start: np.ndarray, horizon: int, trials: int,
                          rng: Generator, block: int = 512) -> float:
    """Compaction engine for long horizons: finished trials drop out."""
    pos = np.broadcast_to(start, (trials, law.d)).copy()
    alive = trials
    hits = 0
    done_steps = 0
    while alive and done_steps < horizon:
        span = min(block, horizon - done_steps)
        steps = law.sample_steps(alive * span, rng).reshape(alive, span, law.d)
        cum = np.cumsum(steps, axis=1)
        cum += pos[:, None, :]
        hit_any = _membership(a_keys, a_box, cum.reshape(-1, law.d),
                              law.d).reshape(alive, span).any(axis=1)
        hits += int(hit_any.sum())
        keep = ~hit_any
        pos = cum[keep, -1, :]
        alive = int(keep.sum())
        done_steps += span
    return float((trials - hits) / trials)


def escape_probabilities(law: StepLaw, points: np.ndarray, horizon: int,
                         trials_per_point: int, seed) -> np.ndarray:
    """P_x(no return to the set within horizon) for every x in the set."""
    from ._kernels import HAVE_NUMBA, escape_fractions_jit
    pts = _as_points(points, law.d)
    keys = pack_coords(pts, law.d)
    order = np.argsort(keys)
    a_keys = keys[order]
    a_box = (pts.min(axis=0), pts.max(axis=0))
    use_jit = HAVE_NUMBA and law.d == 2 and law.family != "point"
    if use_jit:
        kseeds = np.array([_derived_seed(seed, int(k)) for k in keys],
                          dtype=np.int64)
        return escape_fractions_jit(law, a_keys, a_box, pts, horizon,
                                    trials_per_point, kseeds)
    out = np.empty(len(pts))
    long_run = horizon * trials_per_point > 1 << 22
    for i, x in enumerate(pts):
        key = int(keys[i])
        rng = _point_stream(seed, key)
        if long_run:
            out[i] = _escape_fraction_long(law, a_keys, a_box, x, horizon,
                                           trials_per_point, rng)
        else:
            out[i] = _escape_fraction_block(law, a_keys, a_box, x, horizon,
                                            trials_per_point, rng)
    return out


def mc_escape_capacity(points, law: StepLaw, horizon: int,
                       trials_per_point: int, seed,
                       stability: bool = True) -> CapacityEstimate:
    """Capacity as the summed escape-probability estimates of the set.

    ``stability=True`` adds the doubling diagnostic: a quarter-trials run
    at twice the horizon (half the step budget) whose disagreement with the
    main estimate is reported as ``stability_gap``.
    """
    if horizon < 1 or trials_per_point < 1:
        raise InvalidParameterError("horizon and trials_per_point must be >= 1")
    pts = _as_points(points, law.d)
    probs = escape_probabilities(law, pts, horizon, trials_per_point, seed)
    value = float(probs.sum())
    std_error = float(np.sqrt(np.sum(probs * (1.0 - probs)) / trials_per_point))
    gap = None
    if stability:
        t2 = max(trials_per_point // 4, 16)
        probs2 = escape_probabilities(law, pts, 2 * horizon, t2,
                                      (int(seed) ^ 0x9E3779B97F4A7C15))
        gap = float(abs(value - probs2.sum()))
    return CapacityEstimate(value=value, std_error=std_error, method=MC_ESCAPE,
                            horizon=horizon, stability_gap=gap)


def capacity_process(law: StepLaw, n: int, t_grid, estimator_config: dict,
                     seed, replica_id: int = 0,
                     path: RangeState | None = None) -> ProcessSample:
    """Cap(R_floor(nt)) along one walk path on a time grid.

    ``estimator_config`` picks the estimator: {"method": "mc-escape",
    "horizon": L, "trials_per_point": T} or {"method": "equilibrium-solve",
    "evaluator": green_evaluator}.  Only the equilibrium route guarantees
    monotone, +1-Lipschitz values; escape estimates carry Monte Carlo noise.
    """
    from .walks import simulate_path
    validate_grid(t_grid)
    if path is None:
        path = simulate_path(law, int(np.ceil(float(max(t_grid)) * n)), seed)
    floors = floor_times(n, t_grid)
    range_vals = path.cardinality_at(floors)
    caps = np.empty(len(floors))
    method = estimator_config.get("method", MC_ESCAPE)
    for i, m in enumerate(floors):
        pts = path.positions[: m + 1]
        caps[i] = capacity_of_set(pts, law, estimator_config, seed).value
    return ProcessSample(n=int(n), t_grid=list(t_grid), floor_nt=floors,
                         range_values=range_vals, cap_values=caps,
                         replica_id=replica_id, seed=int(seed) if np.isscalar(seed) else 0)


def capacity_of_set(points, law: StepLaw, estimator_config: dict,
                    seed) -> CapacityEstimate:
    method = estimator_config.get("method", MC_ESCAPE)
    if method == EQUILIBRIUM:
        return equilibrium_capacity(
            points, estimator_config["evaluator"],
            use_practical_errors=estimator_config.get("use_practical_errors",
                                                      False))
    if method == MC_ESCAPE:
        return mc_escape_capacity(
            points, law,
            horizon=estimator_config.get("horizon", 64),
            trials_per_point=estimator_config.get("trials_per_point", 32),
            seed=seed, stability=estimator_config.get("stability", False))
    raise InvalidParameterError(f"unknown capacity method {method!r}")


def decomposition_bounds_check(a_points, b_points, evaluator,
                               use_practical_errors: bool = False) -> dict:
    """Subadditivity and the mutual-energy lower bound for Cap(A union B).

    Checks  Cap(A) + Cap(B) - 2 G(A, B) <= Cap(A u B) <= Cap(A) + Cap(B)
    within propagated Green errors and reports all ingredients.
    """
    from .green import mutual_energy
    a = _as_points(a_points)
    b = _as_points(b_points)
    union = np.unique(np.vstack([a, b]), axis=0)
    cap_a = equilibrium_capacity(a, evaluator,
                                 use_practical_errors=use_practical_errors)
    cap_b = equilibrium_capacity(b, evaluator,
                                 use_practical_errors=use_practical_errors)
    cap_u = equilibrium_capacity(union, evaluator,
                                 use_practical_errors=use_practical_errors)
    energy, energy_err = mutual_energy(a, b, evaluator)
    slack = (cap_a.propagated_error + cap_b.propagated_error
             + cap_u.propagated_error + 2.0 * energy_err)
    upper_ok = cap_u.value <= cap_a.value + cap_b.value + slack
    lower_ok = (cap_u.value
                >= cap_a.value + cap_b.value - 2.0 * energy - slack)
    return {
        "cap_a": cap_a.value, "cap_b": cap_b.value, "cap_union": cap_u.value,
        "mutual_energy": energy, "slack": slack,
        "subadditive": bool(upper_ok), "lower_bound": bool(lower_ok),
    }
