"""Exact boundary non-crossing probabilities for Poisson processes and uniform ECDFs."""
from .boundaries import BoundaryPair, CheckpointSchedule, band_width_profile, compile_schedule
from .engine import (
    ecdf_noncrossing,
    log_ecdf_noncrossing,
    log_poisson_noncrossing_conditional,
    log_poisson_noncrossing_unconditional,
    poisson_noncrossing_conditional,
    poisson_noncrossing_unconditional,
    propagate,
)
from .errors import NumericalFailure
from .gof import StatisticSpec, boundaries_from_threshold, compute_statistic, critical_value, pvalue

__all__ = [
    "BoundaryPair",
    "CheckpointSchedule",
    "NumericalFailure",
    "StatisticSpec",
    "band_width_profile",
    "boundaries_from_threshold",
    "compile_schedule",
    "compute_statistic",
    "critical_value",
    "ecdf_noncrossing",
    "log_ecdf_noncrossing",
    "log_poisson_noncrossing_conditional",
    "log_poisson_noncrossing_unconditional",
    "poisson_noncrossing_conditional",
    "poisson_noncrossing_unconditional",
    "propagate",
    "pvalue",
]
