"""Monte Carlo harness: entry generators, population models and the replication loop."""

from simharness.experiment import (
    ExperimentRun,
    execute_experiment,
    histogram_rows,
    ks_distance,
    qq_pairs,
    run_experiment,
    simulate_raw,
    with_overrides,
)
from simharness.generators import gen_entries, stream
from simharness.models import Population, apply_model, model_spikes, population, rotation

__all__ = [
    "ExperimentRun",
    "Population",
    "apply_model",
    "execute_experiment",
    "gen_entries",
    "histogram_rows",
    "ks_distance",
    "model_spikes",
    "population",
    "qq_pairs",
    "rotation",
    "run_experiment",
    "simulate_raw",
    "stream",
    "with_overrides",
]
