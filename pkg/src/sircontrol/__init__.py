"""Optimal timing of epidemic lockdowns in the controlled SIR model."""

from .bounds import IncidenceBounds, herd_immunity_time, herd_immunity_time_bound, incidence_bounds
from .controls import (
    ZERO,
    ControlStrategy,
    CostReport,
    MaintainFeedback,
    PiecewiseConstant,
    ReffThreshold,
    SingleLockdown,
    WaitMaintainSuppressRelax,
    Zero,
    costs,
    evaluate,
    maintain_until_budget,
    quantize,
    realize,
)
from .core import (
    REFERENCE_PARAMS,
    REFERENCE_STATE,
    EpidemicParams,
    EpidemicState,
    SolverOptions,
    Trajectory,
    final_size,
    integrate,
    invert_special,
    peak_prevalence,
    total_incidence,
    vulnerability,
)
from .optimizer import (
    OptimizationResult,
    PeakMinResult,
    ScanResult,
    budget_level_scan,
    calibrate_peak_min,
    optimal_lockdown,
    start_time_sweep,
)

__all__ = [
    "IncidenceBounds",
    "herd_immunity_time",
    "herd_immunity_time_bound",
    "incidence_bounds",
    "ZERO",
    "ControlStrategy",
    "CostReport",
    "MaintainFeedback",
    "PiecewiseConstant",
    "ReffThreshold",
    "SingleLockdown",
    "WaitMaintainSuppressRelax",
    "Zero",
    "costs",
    "evaluate",
    "maintain_until_budget",
    "quantize",
    "realize",
    "REFERENCE_PARAMS",
    "REFERENCE_STATE",
    "EpidemicParams",
    "EpidemicState",
    "SolverOptions",
    "Trajectory",
    "final_size",
    "integrate",
    "invert_special",
    "peak_prevalence",
    "total_incidence",
    "vulnerability",
    "OptimizationResult",
    "PeakMinResult",
    "ScanResult",
    "budget_level_scan",
    "calibrate_peak_min",
    "optimal_lockdown",
    "start_time_sweep",
]

__version__ = "0.1.0"
