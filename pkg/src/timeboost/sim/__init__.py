"""Deterministic discrete-event simulation of the sequencer committee."""

from .config import (
    ConfigError,
    SimConfig,
    bundled_scenario_names,
    load_bundled_scenario,
    load_config,
    load_config_file,
)
from .harness import BroadcastChannel, ReplicaDriver, Simulation, event_log_lines, run_simulation
from .metrics import Metrics, collect_metrics, compare_to_centralized, inclusion_order

__all__ = [
    "BroadcastChannel",
    "ConfigError",
    "Metrics",
    "ReplicaDriver",
    "SimConfig",
    "Simulation",
    "bundled_scenario_names",
    "collect_metrics",
    "compare_to_centralized",
    "event_log_lines",
    "inclusion_order",
    "load_bundled_scenario",
    "load_config",
    "load_config_file",
    "run_simulation",
]
