"""Generators, sweeps, validation experiments and the CLI."""
from .generators import (
    generate_ba,
    generate_er,
    generate_line,
    generate_regular_tree,
    load_graph,
    random_tree,
    regular_tree_depth_for,
)
from .sweep import SweepConfig, TrialRecord, load_config, run_sweep
from .validate import validate

__all__ = [
    "generate_ba",
    "generate_er",
    "generate_line",
    "generate_regular_tree",
    "load_graph",
    "random_tree",
    "regular_tree_depth_for",
    "SweepConfig",
    "TrialRecord",
    "load_config",
    "run_sweep",
    "validate",
]
