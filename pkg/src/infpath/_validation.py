"""Input validation helpers shared by the public functions and estimators."""
from __future__ import annotations

import math
from numbers import Integral, Real


class ContractError(Exception):
    """A documented precondition on the *kind* of input was violated.

    Raised e.g. when a tree-only routine receives a graph with cycles, as
    opposed to plain bad values which raise ``ValueError``.
    """


def check_probability(value, name="p", allow_one=True):
    if not isinstance(value, Real) or isinstance(value, bool) or math.isnan(value):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    upper_ok = value <= 1.0 if allow_one else value < 1.0
    if not (value > 0.0 and upper_ok):
        bound = "(0, 1]" if allow_one else "(0, 1)"
        raise ValueError(f"{name} must lie in {bound}, got {value!r}")
    return float(value)


def check_node(network, u, name="node"):
    if not isinstance(u, Integral) or isinstance(u, bool):
        raise ValueError(f"{name} must be an integer node id, got {u!r}")
    u = int(u)
    if not 0 <= u < network.node_count:
        raise ValueError(f"{name} {u} out of range [0, {network.node_count})")
    return u


def check_tree(network):
    if not network.is_tree:
        raise ContractError("operation requires a tree-shaped network")


def check_nonempty(nodes, what="sampled set"):
    if len(nodes) == 0:
        raise ValueError(f"{what} must be non-empty")
