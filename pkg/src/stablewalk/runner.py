"""Experiment orchestration: replica pools, disk caching, artifact files.

Every heavy computation is a deterministic function of its parameter
block, so results are cached on disk keyed by the SHA-256 of that block;
a rerun with identical parameters reads the cache and is byte-identical.
Replica tasks are farmed to a process pool; seeds derive from
(master seed, replica id), so worker count and scheduling never affect
values, only wall-clock time.
"""

from __future__ import annotations

import csv
import json
import os
from multiprocessing import Pool

import numpy as np

from .capacity import capacity_of_set
from .config import replica_seed
from .steps import StepLaw, build_step_law
from .walks import floor_times, simulate_path, validate_grid

SAMPLER_VERSION = 3  # bump to invalidate caches when sampling internals change

_CACHE_DIR = os.environ.get("STABLEWALK_CACHE",
                            os.path.join(os.path.dirname(__file__), "..", "..",
                                         ".cache"))


def _cache_path(name: str, params: dict) -> str:
    import hashlib
    blob = json.dumps({"params": params, "v": SAMPLER_VERSION}, sort_keys=True)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:20]
    os.makedirs(_CACHE_DIR, exist_ok=True)
    return os.path.join(_CACHE_DIR, f"{name}-{digest}.npz")


def cached_arrays(name: str, params: dict, builder) -> dict:
    """Load {name: array} results from cache or build and store them."""
    path = _cache_path(name, params)
    if os.path.exists(path):
        with np.load(path, allow_pickle=False) as data:
            return {k: data[k] for k in data.files}
    out = builder()
    np.savez_compressed(path, **out)
    return out


# ---------------------------------------------------------------------------
# replica workers (module-level for multiprocessing pickling)
# ---------------------------------------------------------------------------

def _range_worker(args):
    law_spec, n, t_grid, seed, replica_id = args
    law = build_step_law(**law_spec)
    path = simulate_path(law, int(np.ceil(float(max(t_grid)) * n)), seed)
    floors = floor_times(n, t_grid)
    return replica_id, path.cardinality_at(floors)


def _capacity_worker(args):
    law_spec, n, t_grid, seed, replica_id, estimator, path_t = args
    law = build_step_law(**law_spec)
    horizon_steps = int(np.ceil(float(path_t) * n))
    path = simulate_path(law, horizon_steps, seed)
    floors = floor_times(n, t_grid)
    caps = np.empty(len(floors))
    for i, m in enumerate(floors):
        pts = path.positions[: int(m) + 1]
        caps[i] = capacity_of_set(pts, law, estimator, seed).value
    return replica_id, caps, path.cardinality_at(floors)


def _capacity_extra_worker(args):
    law_spec, n, t_grid, seed, replica_id, estimator, extra_times, path_t = args
    law = build_step_law(**law_spec)
    horizon_steps = int(np.ceil(float(path_t) * n))
    path = simulate_path(law, horizon_steps, seed)
    floors = floor_times(n, extra_times)
    caps = np.empty(len(floors))
    for i, m in enumerate(floors):
        pts = path.positions[: int(m) + 1]
        caps[i] = capacity_of_set(pts, law, estimator, seed).value
    return replica_id, caps


def _pool_map(worker, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with Pool(processes=workers) as pool:
        return pool.map(worker, tasks, chunksize=max(1, len(tasks) // (8 * workers)))


def _law_spec_of(law: StepLaw) -> dict:
    return {"d": law.d, "alpha": law.alpha, "loop_prob": law.loop_prob,
            "family": law.family}


# ---------------------------------------------------------------------------
# sample generation
# ---------------------------------------------------------------------------

def range_samples(law: StepLaw, n: int, t_grid, replicas: int,
                  master_seed: int, workers: int = 2,
                  id_offset: int = 0) -> np.ndarray:
    """(replicas, len(t_grid)) range cardinalities |R_floor(nt)|."""
    validate_grid(t_grid)
    spec = _law_spec_of(law)
    params = {"law": spec, "n": n, "grid": [str(t) for t in t_grid],
              "replicas": replicas, "seed": master_seed, "offset": id_offset}

    def build():
        tasks = [(spec, n, t_grid, replica_seed(master_seed, id_offset + i),
                  id_offset + i) for i in range(replicas)]
        rows = _pool_map(_range_worker, tasks, workers)
        rows.sort(key=lambda r: r[0])
        return {"values": np.vstack([r[1] for r in rows]).astype(np.int64)}

    return cached_arrays("range", params, build)["values"]


def capacity_samples(law: StepLaw, n: int, t_grid, replicas: int,
                     master_seed: int, estimator: dict, workers: int = 2,
                     id_offset: int = 0, path_t=None) -> dict:
    """Capacity and range values per replica along the grid.

    ``path_t`` fixes the simulated path length (in units of n) so that
    runs needing extra evaluation times later share bit-identical paths.
    """
    validate_grid(t_grid)
    if path_t is None:
        path_t = float(max(t_grid))
    spec = _law_spec_of(law)
    params = {"law": spec, "n": n, "grid": [str(t) for t in t_grid],
              "replicas": replicas, "seed": master_seed,
              "estimator": estimator, "offset": id_offset,
              "path_t": str(path_t)}

    def build():
        tasks = [(spec, n, t_grid, replica_seed(master_seed, id_offset + i),
                  id_offset + i, estimator, path_t) for i in range(replicas)]
        rows = _pool_map(_capacity_worker, tasks, workers)
        rows.sort(key=lambda r: r[0])
        return {"caps": np.vstack([r[1] for r in rows]),
                "cards": np.vstack([r[2] for r in rows]).astype(np.int64)}

    return cached_arrays("capacity", params, build)


def capacity_samples_at(law: StepLaw, n: int, base_grid, per_replica_times,
                        replicas: int, master_seed: int, estimator: dict,
                        workers: int = 2, path_t=None) -> dict:
    """Capacity values at replica-specific extra times (stop-rule offsets).

    ``per_replica_times`` maps replica_id -> list of times; returns a dict
    of arrays aligned with the sorted replica ids.  ``path_t`` must match
    the value used for the base-grid run so paths are identical.
    """
    if path_t is None:
        path_t = float(max(base_grid))
    spec = _law_spec_of(law)
    params = {"law": spec, "n": n, "per": {str(k): [str(t) for t in v]
                                           for k, v in sorted(per_replica_times.items())},
              "seed": master_seed, "estimator": estimator,
              "base": [str(t) for t in base_grid], "path_t": str(path_t)}

    def build():
        tasks = [(spec, n, list(base_grid),
                  replica_seed(master_seed, rid), rid, estimator, times, path_t)
                 for rid, times in sorted(per_replica_times.items())]
        rows = _pool_map(_capacity_extra_worker, tasks, workers)
        rows.sort(key=lambda r: r[0])
        return {"ids": np.array([r[0] for r in rows], dtype=np.int64),
                "caps": np.vstack([r[1] for r in rows])}

    return cached_arrays("capacity-extra", params, build)


# ---------------------------------------------------------------------------
# artifact writers (CSV / JSON with stable formatting)
# ---------------------------------------------------------------------------

def write_samples_csv(path: str, n: int, t_grid, range_values: np.ndarray,
                      cap_values: np.ndarray | None) -> None:
    floors = floor_times(n, t_grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["replica", "t", "floor_nt", "range_card"]
        if cap_values is not None:
            header.append("cap")
        writer.writerow(header)
        for rid in range(len(range_values)):
            for j, t in enumerate(t_grid):
                row = [rid, t, int(floors[j]), int(range_values[rid, j])]
                if cap_values is not None:
                    row.append(repr(float(cap_values[rid, j])))
                writer.writerow(row)


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_green_json(path: str, table) -> None:
    payload = {
        "law_fingerprint": table.law_fingerprint,
        "d": table.d,
        "radius": table.radius,
        "method": table.method,
        "meta": {k: (v if not isinstance(v, np.generic) else float(v))
                 for k, v in table.meta.items()},
        "orbits": {",".join(map(str, k)): [table.orbit_values[k],
                                           table.orbit_errors[k]]
                   for k in sorted(table.orbit_values)},
    }
    write_json(path, payload)
