"""Locate the source of an SI cascade from sparse first-infection timestamps."""
from ._validation import ContractError
from .diffusion import Cascade, DiffusionConfig, Observation, derive_seed, sample_observers, simulate_si
from .estimators import (
    Estimate,
    InfectionPathEstimator,
    MinTimestampEstimator,
    localize_graph,
    localize_tree,
    min_timestamp_estimator,
    reduced_search_space,
    time_labeled_bfs,
)
from .graph import Network, RootedTree, bfs_tree, from_edges, read_edgelist, sampled_distance, steiner_tree, tree_path
from .lip import CascadingTree, brute_force_lip, build_cascading_tree, message_passing, path_log_likelihood

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "Cascade",
    "DiffusionConfig",
    "Observation",
    "derive_seed",
    "sample_observers",
    "simulate_si",
    "Estimate",
    "InfectionPathEstimator",
    "MinTimestampEstimator",
    "localize_graph",
    "localize_tree",
    "min_timestamp_estimator",
    "reduced_search_space",
    "time_labeled_bfs",
    "Network",
    "RootedTree",
    "bfs_tree",
    "from_edges",
    "read_edgelist",
    "sampled_distance",
    "steiner_tree",
    "tree_path",
    "CascadingTree",
    "brute_force_lip",
    "build_cascading_tree",
    "message_passing",
    "path_log_likelihood",
]
