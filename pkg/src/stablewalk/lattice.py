"""Lattice points, packed coordinate keys, and additive-subgroup checks.

Walk paths roam far under heavy-tailed steps, so visited sets are keyed by
packing all d signed coordinates of a point into one int64.  CPython's
built-in set/dict over these keys is the open-addressing store; packing
overflow raises instead of silently wrapping.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, PackingOverflowError


def coordinate_bits(d: int) -> int:
    """Per-coordinate bit budget so that d signed coordinates fit an int64."""
    return 63 // d


def pack_coords(coords: np.ndarray, d: int) -> np.ndarray:
    """Pack an (n, d) int array of lattice points into n int64 keys.

    Each coordinate is offset-encoded into ``coordinate_bits(d)`` bits.
    Raises PackingOverflowError if any coordinate falls outside the budget.
    """
    coords = np.asarray(coords, dtype=np.int64)
    if coords.ndim == 1:
        coords = coords[None, :]
    if coords.shape[1] != d:
        raise DimensionMismatchError(
            f"expected points of dimension {d}, got {coords.shape[1]}")
    bits = coordinate_bits(d)
    half = np.int64(1) << (bits - 1)
    shifted = coords + half
    if shifted.min() < 0 or shifted.max() >= (np.int64(1) << bits):
        worst = int(np.abs(coords).max())
        raise PackingOverflowError(
            f"coordinate magnitude {worst} exceeds the {bits}-bit budget "
            f"for d={d}; use the unpacked fallback for this path")
    keys = np.zeros(len(shifted), dtype=np.int64)
    for j in range(d):
        keys = (keys << bits) | shifted[:, j]
    return keys


def unpack_coords(keys: np.ndarray, d: int) -> np.ndarray:
    """Inverse of pack_coords; returns an (n, d) int64 array."""
    keys = np.asarray(keys, dtype=np.int64)
    bits = coordinate_bits(d)
    half = np.int64(1) << (bits - 1)
    mask = (np.int64(1) << bits) - 1
    out = np.empty((len(keys), d), dtype=np.int64)
    for j in range(d - 1, -1, -1):
        out[:, j] = (keys & mask) - half
        keys = keys >> bits
    return out


def generates_full_lattice(vectors, d: int) -> bool:
    """True iff the integer vectors generate Z^d as an additive group.

    Computed by exact integer row reduction (Hermite-style): the subgroup
    equals Z^d exactly when the reduced basis has determinant +-1.
    """
    rows = [list(map(int, v)) for v in vectors if any(int(c) != 0 for c in v)]
    if not rows:
        return d == 0
    index = 1
    col = 0
    while col < d and rows:
        # choose the row with the smallest nonzero entry in this column
        candidates = [r for r in rows if r[col] != 0]
        if not candidates:
            return False  # rank deficiency: some coordinate never reached
        while True:
            candidates.sort(key=lambda r: abs(r[col]))
            pivot = candidates[0]
            done = True
            for r in candidates[1:]:
                q = r[col] // pivot[col]
                for j in range(d):
                    r[j] -= q * pivot[j]
                if r[col] != 0:
                    done = False
            candidates = [pivot] + [r for r in candidates[1:] if r[col] != 0]
            if done or len(candidates) == 1:
                break
        index *= abs(pivot[col])
        rows = [r for r in rows if r is not pivot and any(r)]
        col += 1
    if col < d:
        return False
    return index == 1
