"""Rank-based comparison curves and tests of H: F >= G for two independent samples."""

from .empirical import DataError, Sample, TiesPolicy, TiesViolation, TwoSampleData
from .grid import DyadicGrid, default_resolution, evaluate_P, evaluate_U
from .montecarlo import NullDistribution, barriers, critical_value, p_value, simulate_null
from .statistics import STATISTICS, compute_statistic, default_epsilon

__all__ = [
    "DataError",
    "Sample",
    "TiesPolicy",
    "TiesViolation",
    "TwoSampleData",
    "DyadicGrid",
    "default_resolution",
    "evaluate_P",
    "evaluate_U",
    "NullDistribution",
    "barriers",
    "critical_value",
    "p_value",
    "simulate_null",
    "STATISTICS",
    "compute_statistic",
    "default_epsilon",
]
