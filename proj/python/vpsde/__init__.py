"""Euler-Maruyama sampling of the reverse VP-SDE with moment-matched noise."""

from ._core import (
    analytic_moments,
    distance,
    gronwall_continuous_bound,
    gronwall_discrete_bound,
    gronwall_selftest,
    noise_families,
    reverse_sample,
    run_experiment,
    sample_noise,
    schedule,
    set_threads,
    strong_error_sweep,
)

__all__ = [
    "analytic_moments",
    "distance",
    "gronwall_continuous_bound",
    "gronwall_discrete_bound",
    "gronwall_selftest",
    "noise_families",
    "reverse_sample",
    "run_experiment",
    "sample_noise",
    "schedule",
    "set_threads",
    "strong_error_sweep",
]
