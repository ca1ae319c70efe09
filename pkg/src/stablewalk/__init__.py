"""Heavy-tailed lattice random walks: ranges, capacities, Green functions,
and statistical verification of their Gaussian scaling limits."""

from .steps import (AXIAL, LAZY, NOT_IMPLIED, STRONGLY_TRANSIENT, TRANSIENT,
                    StepLaw, build_step_law, check_aperiodicity,
                    point_step_law, transience_class)
from .walks import (ProcessSample, RangeState, decompose_range, floor_times,
                    intersect_count, path_from_steps,
                    range_cardinality_process, simulate_path)
from .scaling import (ScalingSpec, capacity_overlap_envelope, growth_exponent,
                      intersection_envelope)
from .stats import (TestReport, cramer_wold_projection, fdd_covariance_report,
                    normality_report, stopped_increment_report)
from .green import (GreenTable, build_quadrature_table,
                    convolution_green_oracle, cross_green_estimate,
                    mutual_energy, quadrature_green)
from .capacity import (CapacityEstimate, decomposition_bounds_check,
                       equilibrium_capacity, mc_escape_capacity)

__all__ = [
    "AXIAL", "LAZY", "NOT_IMPLIED", "STRONGLY_TRANSIENT", "TRANSIENT",
    "StepLaw", "build_step_law", "check_aperiodicity", "point_step_law",
    "transience_class", "ProcessSample", "RangeState", "decompose_range",
    "floor_times", "intersect_count", "path_from_steps",
    "range_cardinality_process", "simulate_path", "ScalingSpec",
    "capacity_overlap_envelope", "growth_exponent", "intersection_envelope",
    "TestReport", "cramer_wold_projection", "fdd_covariance_report",
    "normality_report", "stopped_increment_report", "GreenTable",
    "build_quadrature_table", "convolution_green_oracle",
    "cross_green_estimate", "mutual_energy", "quadrature_green",
    "CapacityEstimate", "decomposition_bounds_check", "equilibrium_capacity",
    "mc_escape_capacity",
]
