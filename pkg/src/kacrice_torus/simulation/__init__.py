"""Direct simulation of random Fourier series on T^1 and T^2."""

from .critical_points import (
    CriticalPointReport,
    count_critical_points,
    expected_pair_count,
    pair_count,
)
from .field import FieldSample, eval_field, positive_modes, sample_field, truncation_order
from .runner import (
    EmpiricalMoments,
    bootstrap_errors,
    empirical_moments,
    simulate_counts,
    write_counts_csv,
)

__all__ = [
    "CriticalPointReport",
    "EmpiricalMoments",
    "FieldSample",
    "bootstrap_errors",
    "count_critical_points",
    "empirical_moments",
    "eval_field",
    "expected_pair_count",
    "pair_count",
    "positive_modes",
    "sample_field",
    "simulate_counts",
    "truncation_order",
    "write_counts_csv",
]
