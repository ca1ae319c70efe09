"""Path simulation, range tracking, intersections, and range decomposition.

The workhorse representation of a simulated path is the array of positions
plus the array of first-visit indices: sorting the step index of each site's
first visit makes every prefix cardinality |R_m| a single searchsorted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (DimensionMismatchError, GridError, InsufficientPathError,
                     PackingOverflowError)
from .lattice import pack_coords
from .steps import StepLaw


def floor_times(n: int, t_grid) -> np.ndarray:
    """Exact floor(n * t) for each grid time, via rational arithmetic.

    Grid times may be floats, strings, or Fractions; floats are converted
    through their shortest decimal representation so that 0.1 means 1/10.
    Floors at +-1 resolution matter downstream, so no float multiplication
    is allowed here.
    """
    out = []
    for t in t_grid:
        frac = t if isinstance(t, Fraction) else Fraction(str(t))
        if frac < 0:
            raise GridError("grid times must be nonnegative")
        out.append(int(n * frac.numerator // frac.denominator))
    return np.asarray(out, dtype=np.int64)


def validate_grid(t_grid) -> None:
    if len(t_grid) == 0:
        raise GridError("empty time grid")
    fr = [Fraction(str(t)) for t in t_grid]
    if fr[0] != 0:
        raise GridError("time grid must start at 0")
    if any(b <= a for a, b in zip(fr, fr[1:])):
        raise GridError("time grid must be strictly increasing")


@dataclass
class RangeState:
    """A walk path after n steps with its visited-site bookkeeping."""

    d: int
    positions: np.ndarray            # (n+1, d) including the origin
    keys: np.ndarray                 # packed keys, or None when unpackable
    first_visit_steps: np.ndarray    # sorted step indices of first visits
    path_logged: bool = True
    _visited: set = field(default=None, repr=False)

    @property
    def step_count(self) -> int:
        return len(self.positions) - 1

    @property
    def position(self) -> tuple:
        return tuple(int(c) for c in self.positions[-1])

    @property
    def cardinality(self) -> int:
        return len(self.first_visit_steps)

    @property
    def visited(self) -> set:
        """The range as a set of coordinate tuples (built lazily)."""
        if self._visited is None:
            self._visited = {tuple(int(c) for c in row) for row in self.positions}
        return self._visited

    def cardinality_at(self, m) -> np.ndarray:
        """|R_m| for one or many prefix lengths m (vectorized)."""
        m = np.asarray(m, dtype=np.int64)
        return np.searchsorted(self.first_visit_steps, m, side="right")

    def prefix_keys(self, m: int) -> np.ndarray:
        """Packed keys of the distinct sites in R_m (requires packable path)."""
        if self.keys is None:
            raise PackingOverflowError("path was stored unpacked")
        return np.unique(self.keys[: m + 1])


def _first_visit_order(positions: np.ndarray, d: int):
    """Packed keys and the sorted step indices of first visits."""
    try:
        keys = pack_coords(positions, d)
    except PackingOverflowError:
        seen = set()
        firsts = []
        for i, row in enumerate(positions):
            t = tuple(int(c) for c in row)
            if t not in seen:
                seen.add(t)
                firsts.append(i)
        return None, np.asarray(firsts, dtype=np.int64)
    _, first_idx = np.unique(keys, return_index=True)
    first_idx.sort()
    return keys, first_idx


def path_from_steps(steps) -> RangeState:
    """Build a RangeState from an explicit list of step vectors (test aid)."""
    steps = np.asarray(steps, dtype=np.int64)
    if steps.ndim == 1:
        steps = steps[:, None]
    d = steps.shape[1]
    positions = np.vstack([np.zeros((1, d), dtype=np.int64), np.cumsum(steps, axis=0)])
    keys, first_idx = _first_visit_order(positions, d)
    return RangeState(d=d, positions=positions, keys=keys, first_visit_steps=first_idx)


def simulate_path(law: StepLaw, n: int, seed) -> RangeState:
    """Walk n steps from the origin; bit-reproducible for a fixed seed."""
    rng = np.random.default_rng(seed)
    steps = law.sample_steps(int(n), rng)
    positions = np.vstack([np.zeros((1, law.d), dtype=np.int64),
                           np.cumsum(steps, axis=0)])
    keys, first_idx = _first_visit_order(positions, law.d)
    return RangeState(d=law.d, positions=positions, keys=keys,
                      first_visit_steps=first_idx)


@dataclass
class ProcessSample:
    """Range / capacity values of one replica along a time grid."""

    n: int
    t_grid: list
    floor_nt: np.ndarray
    range_values: np.ndarray
    cap_values: np.ndarray | None
    replica_id: int
    seed: int


def range_cardinality_process(law: StepLaw, n: int, t_grid, seed,
                              replica_id: int = 0) -> ProcessSample:
    """|R_{floor(n t)}| along one path, one pass, no replay."""
    validate_grid(t_grid)
    state = simulate_path(law, n, seed)
    floors = floor_times(n, t_grid)
    values = state.cardinality_at(floors)
    return ProcessSample(n=int(n), t_grid=list(t_grid), floor_nt=floors,
                         range_values=values, cap_values=None,
                         replica_id=replica_id, seed=int(seed))


def intersect_count(path_a: RangeState, path_b: RangeState) -> int:
    """|R_n ∩ R~_n| of two recorded paths by set intersection."""
    if path_a.d != path_b.d:
        raise DimensionMismatchError("paths live in different dimensions")
    if path_a.keys is not None and path_b.keys is not None:
        a = np.unique(path_a.keys)
        b = np.unique(path_b.keys)
        return int(len(np.intersect1d(a, b, assume_unique=True)))
    return len(path_a.visited & path_b.visited)


def intersection_count_process(path_a: RangeState, path_b: RangeState,
                               checkpoints) -> np.ndarray:
    """|R_m ∩ R~_m| at each checkpoint m along two coupled paths."""
    if path_a.d != path_b.d:
        raise DimensionMismatchError("paths live in different dimensions")
    out = np.empty(len(checkpoints), dtype=np.int64)
    for i, m in enumerate(checkpoints):
        a = path_a.prefix_keys(int(m))
        b = path_b.prefix_keys(int(m))
        out[i] = len(np.intersect1d(a, b, assume_unique=True))
    return out


def decompose_range(path: RangeState, m: int, n: int):
    """Split |R_{m+n}| into prefix, shifted-segment, and overlap counts.

    Returns (card_m, card_shifted_n, overlap) where card_m = |R_m|,
    card_shifted_n = |R[m, m+n] - S_m| and overlap = |R_m ∩ R[m, m+n]|,
    so that |R_{m+n}| = card_m + card_shifted_n - overlap exactly.
    """
    if m < 0 or n < 0:
        raise InsufficientPathError("negative segment lengths")
    if path.step_count < m + n:
        raise InsufficientPathError(
            f"path has {path.step_count} steps, need {m + n}")
    if not path.path_logged:
        raise InsufficientPathError("path positions were not logged")
    pos = path.positions
    seg = pos[m: m + n + 1]
    shifted = seg - pos[m]
    if path.keys is not None:
        prefix = np.unique(path.keys[: m + 1])
        segment = np.unique(path.keys[m: m + n + 1])
        card_m = len(prefix)
        overlap = len(np.intersect1d(prefix, segment, assume_unique=True))
    else:
        pset = {tuple(int(c) for c in row) for row in pos[: m + 1]}
        sset = {tuple(int(c) for c in row) for row in seg}
        card_m = len(pset)
        overlap = len(pset & sset)
    card_shifted = len({tuple(int(c) for c in row) for row in shifted})
    return card_m, card_shifted, overlap
