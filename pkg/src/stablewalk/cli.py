"""Command-line interface.

Subcommands: walk sim, green table, capacity exact, capacity walk,
intersections, fclt cap, fclt range, verify.  All simulation commands are
driven by a JSON config; outputs are byte-stable across reruns.
Exit status: 0 all pass, 1 failure, 2 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .capacity import equilibrium_capacity
from .config import parse_config
from .errors import ConfigError, InsufficientReplicasError, RegimeViolationError
from .green import build_quadrature_table, quadrature_table
from .runner import (capacity_samples, range_samples, write_green_json,
                     write_json, write_samples_csv)
from .stats import estimate_sigma, fdd_covariance_report, normality_report
from .walks import floor_times, intersection_count_process, simulate_path


def _load(args, experiment: str):
    with open(args.config) as fh:
        doc = json.load(fh)
    doc["experiment"] = experiment
    if getattr(args, "seed", None) is not None:
        doc["master_seed"] = args.seed
    cfg = parse_config(doc)
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    return cfg


def cmd_walk_sim(args) -> int:
    cfg = _load(args, "walk-sim")
    law = cfg.law()
    n = int(cfg.n_values[0])
    values = range_samples(law, n, cfg.t_grid, cfg.replicas, cfg.master_seed,
                           workers=cfg.workers)
    write_samples_csv(args.out, n, cfg.t_grid, values, None)
    return 0


def cmd_green_table(args) -> int:
    cfg = _load(args, "green-table")
    table = build_quadrature_table(cfg.law(), args.radius, args.tol)
    write_green_json(args.out, table)
    return 0


def cmd_capacity_exact(args) -> int:
    with open(args.set) as fh:
        pts = np.asarray(json.load(fh), dtype=np.int64)
    with open(args.config) as fh:
        doc = json.load(fh)
    doc["experiment"] = "capacity-walk"
    cfg = parse_config(doc)
    law = cfg.law()
    radius = max(8, int(np.abs(pts).max()) * 2)
    table = quadrature_table(law, radius, float(doc.get("green_tol", 1e-4)))
    est = equilibrium_capacity(pts, table)
    payload = {"capacity": est.value, "method": est.method,
               "propagated_error": est.propagated_error,
               "condition": est.condition, "points": pts.tolist()}
    write_json(args.out, payload)
    return 0


def cmd_capacity_walk(args) -> int:
    cfg = _load(args, "capacity-walk")
    law = cfg.law()
    n = int(cfg.n_values[0])
    estimator = cfg.estimator or {"method": "mc-escape", "horizon": 64,
                                  "trials_per_point": 32}
    data = capacity_samples(law, n, cfg.t_grid, cfg.replicas, cfg.master_seed,
                            estimator, workers=cfg.workers)
    write_samples_csv(args.out, n, cfg.t_grid, data["cards"], data["caps"])
    return 0


def cmd_intersections(args) -> int:
    cfg = _load(args, "intersections")
    law = cfg.law()
    n = int(cfg.n_values[0])
    floors = floor_times(n, cfg.t_grid)
    from .config import replica_seed
    rows = []
    for rep in range(cfg.replicas):
        pa = simulate_path(law, n, replica_seed(cfg.master_seed, 2 * rep))
        pb = simulate_path(law, n, replica_seed(cfg.master_seed, 2 * rep + 1))
        counts = intersection_count_process(pa, pb, floors)
        rows.append(counts)
    import csv
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replica", "t", "floor_nt", "intersections"])
        for rep, counts in enumerate(rows):
            for j, t in enumerate(cfg.t_grid):
                writer.writerow([rep, t, int(floors[j]), int(counts[j])])
    return 0


def _fclt_report(cfg, values: np.ndarray, process_name: str) -> dict:
    grid = [t for t in cfg.t_grid if float(t) > 0]
    cols = values[:, -len(grid):].astype(float)
    n = int(cfg.n_values[0])
    tol = cfg.tolerances
    report = {"process": process_name, "n": n, "replicas": cfg.replicas,
              "t_grid": [float(t) for t in cfg.t_grid],
              "tolerances": {"p_floor": tol.get("p_floor", 0.01),
                             "skew_tol": tol.get("skew_tol", 0.15),
                             "kurt_tol": tol.get("kurt_tol", 0.35),
                             "cov_rel_tol": tol.get("cov_rel_tol", 0.15)}}
    normal = normality_report(cols[:, -1], seed=cfg.master_seed,
                              p_floor=report["tolerances"]["p_floor"],
                              skew_tol=report["tolerances"]["skew_tol"],
                              kurt_tol=report["tolerances"]["kurt_tol"])
    report["normality"] = normal.to_dict()
    report["sigma_hat"] = estimate_sigma(cols[:, -1], n, float(grid[-1]))
    if len(grid) >= 2 and cfg.replicas >= 500:
        fdd = fdd_covariance_report(cols, n, [float(t) for t in grid],
                                    seed=cfg.master_seed,
                                    rel_tol=report["tolerances"]["cov_rel_tol"])
        report["fdd_covariance"] = fdd.to_dict()
        report["passed"] = normal.passed and fdd.passed
    else:
        report["passed"] = normal.passed
    return report


def cmd_fclt_cap(args) -> int:
    cfg = _load(args, "capacity-fclt")
    law = cfg.law()
    n = int(cfg.n_values[0])
    estimator = cfg.estimator or {"method": "mc-escape", "horizon": 64,
                                  "trials_per_point": 32}
    try:
        data = capacity_samples(law, n, cfg.t_grid, cfg.replicas,
                                cfg.master_seed, estimator,
                                workers=cfg.workers)
        report = _fclt_report(cfg, data["caps"], "capacity")
    except InsufficientReplicasError as exc:
        write_json(args.out, {"inconclusive": True, "reason": str(exc)})
        return 2
    write_json(args.out, report)
    return 0 if report["passed"] else 1


def cmd_fclt_range(args) -> int:
    cfg = _load(args, "range-fclt")
    law = cfg.law()
    n = int(cfg.n_values[0])
    try:
        values = range_samples(law, n, cfg.t_grid, cfg.replicas,
                               cfg.master_seed, workers=cfg.workers)
        report = _fclt_report(cfg, values, "range")
    except InsufficientReplicasError as exc:
        write_json(args.out, {"inconclusive": True, "reason": str(exc)})
        return 2
    write_json(args.out, report)
    return 0 if report["passed"] else 1


def cmd_verify(args) -> int:
    from .acceptance import run_all
    results = run_all(workers=args.workers or 2)
    if args.out:
        write_json(args.out, {label: res for label, res in results})
    if any(res.get("inconclusive") for _, res in results):
        return 2
    return 0 if all(res["passed"] for _, res in results) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stablewalk")
    sub = parser.add_subparsers(dest="group", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)

    walk = sub.add_parser("walk").add_subparsers(dest="cmd", required=True)
    p = walk.add_parser("sim")
    common(p)
    p.set_defaults(fn=cmd_walk_sim)

    green = sub.add_parser("green").add_subparsers(dest="cmd", required=True)
    p = green.add_parser("table")
    common(p)
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(fn=cmd_green_table)

    cap = sub.add_parser("capacity").add_subparsers(dest="cmd", required=True)
    p = cap.add_parser("exact")
    p.add_argument("--set", required=True)
    common(p)
    p.set_defaults(fn=cmd_capacity_exact)
    p = cap.add_parser("walk")
    common(p)
    p.set_defaults(fn=cmd_capacity_walk)

    p = sub.add_parser("intersections")
    common(p)
    p.set_defaults(fn=cmd_intersections)

    fclt = sub.add_parser("fclt").add_subparsers(dest="cmd", required=True)
    p = fclt.add_parser("cap")
    common(p)
    p.set_defaults(fn=cmd_fclt_cap)
    p = fclt.add_parser("range")
    common(p)
    p.set_defaults(fn=cmd_fclt_range)

    p = sub.add_parser("verify")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RegimeViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
