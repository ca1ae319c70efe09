"""Run configuration: schema validation, regime checks, seed derivation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.random import SeedSequence

from .errors import ConfigError, RegimeViolationError
from .steps import (STRONGLY_TRANSIENT, StepLaw, build_step_law,
                    check_aperiodicity, transience_class)

# centering replicas draw from a disjoint id range so their means are
# independent of the samples they center
CENTER_ID_OFFSET = 1 << 32


@dataclass
class RunConfig:
    """Validated experiment description (one JSON document)."""

    law_spec: dict
    experiment: str
    n_values: list
    t_grid: list
    replicas: int
    master_seed: int
    estimator: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    centering_replicas: int = 0
    workers: int = 2
    raw: dict = field(default_factory=dict)

    def law(self) -> StepLaw:
        sp = self.law_spec
        return build_step_law(sp["d"], sp["alpha"], sp.get("loop_prob", 0.0),
                              sp["family"])

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()).hexdigest()[:16]


_EXPERIMENTS = ("capacity-fclt", "range-fclt", "walk-sim", "green-table",
                "capacity-walk", "intersections")


def parse_config(doc: dict) -> RunConfig:
    """Validate a config document and apply the regime gates."""
    if not isinstance(doc, dict) or not doc:
        raise ConfigError("config must be a non-empty JSON object")
    for req in ("law", "experiment", "master_seed"):
        if req not in doc:
            raise ConfigError(f"missing required config key {req!r}")
    law_spec = doc["law"]
    for req in ("d", "alpha", "family"):
        if req not in law_spec:
            raise ConfigError(f"law block missing {req!r}")
    experiment = doc["experiment"]
    if experiment not in _EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = RunConfig(
        law_spec=law_spec,
        experiment=experiment,
        n_values=list(doc.get("n_values", [1024])),
        t_grid=list(doc.get("t_grid", [0, 0.25, 0.5, 0.75, 1.0])),
        replicas=int(doc.get("replicas", 2000)),
        master_seed=int(doc["master_seed"]),
        estimator=dict(doc.get("estimator", {})),
        tolerances=dict(doc.get("tolerances", {})),
        centering_replicas=int(doc.get("centering_replicas", 0)),
        workers=int(doc.get("workers", 2)),
        raw=doc,
    )
    if cfg.replicas < 1 or any(n < 1 for n in cfg.n_values):
        raise ConfigError("replicas and n_values must be positive")
    law = cfg.law()
    d, alpha = law.d, law.alpha
    if experiment == "capacity-fclt":
        if transience_class(d, alpha) != STRONGLY_TRANSIENT:
            raise RegimeViolationError(
                "strong transience (d > 2 alpha)",
                f"d={d}, alpha={alpha} gives d/alpha={d / alpha:.3f}")
        if d / alpha <= 2.5:
            raise RegimeViolationError(
                "d/alpha > 5/2", f"d/alpha = {d / alpha:.3f} <= 2.5")
    if experiment == "range-fclt":
        if d / alpha <= 1.5:
            raise RegimeViolationError(
                "d/alpha > 3/2", f"d/alpha = {d / alpha:.3f} <= 1.5")
    if experiment in ("capacity-fclt", "range-fclt", "walk-sim"):
        if not check_aperiodicity(law):
            raise RegimeViolationError("aperiodicity",
                                       "support does not generate the lattice")
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return parse_config(json.load(fh))


def replica_seed(master_seed: int, replica_id: int) -> int:
    """Injective 64-bit stream key for one replica."""
    state = SeedSequence((int(master_seed), int(replica_id))).generate_state(
        1, np.uint64)
    return int(state[0])


def replica_seeds(master_seed: int, count: int, id_offset: int = 0) -> list:
    return [replica_seed(master_seed, id_offset + i) for i in range(count)]
