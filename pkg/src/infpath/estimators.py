"""Source estimators: infection-path search on trees and graphs, and the MIN baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_node, check_nonempty, check_probability, check_tree
from .diffusion import Observation
from .graph import Network, RootedTree, rooted_from_parents, steiner_tree
from .lip import (
    build_cascading_tree,
    message_passing,
    path_log_likelihood,
    prune_to_sampled,
    rerooted_aggregate_delays,
)

__all__ = [
    "Estimate",
    "TimeLabeledBfsTree",
    "reduced_search_space",
    "localize_tree",
    "time_labeled_bfs",
    "localize_graph",
    "min_timestamp_estimator",
    "InfectionPathEstimator",
    "MinTimestampEstimator",
]

NEG_INF = -math.inf


@dataclass(frozen=True)
class Estimate:
    """Outcome of one localisation.

    ``scores`` holds the aggregate delay of every feasible candidate, so the
    full tie set is ``{u for u, a in scores.items() if a == score}``.
    ``fallback`` is true when no candidate was feasible and the earliest
    observer was returned instead.
    """

    source: int
    score: int | None
    log_likelihood: float
    search_region: frozenset
    feasible_set: frozenset
    scores: dict = field(default_factory=dict, repr=False)
    fallback: bool = False

    @property
    def tie_set(self) -> frozenset:
        if self.score is None:
            return frozenset({self.source})
        return frozenset(u for u, a in self.scores.items() if a == self.score)


@dataclass(frozen=True)
class TimeLabeledBfsTree:
    tree: RootedTree
    sigma: dict
    reached_sampled: frozenset


def _as_observation(obs) -> Observation:
    if isinstance(obs, Observation):
        return obs
    return Observation(obs)


def _argmin(scores: dict):
    return min(scores, key=lambda u: (scores[u], u))


def reduced_search_space(g: Network, obs) -> frozenset:
    """Nodes on paths from the earliest observer to the observers within two hops of it.

    "Hops" count observers: starting from the earliest observer ``s0`` the
    walk over the cascading tree of ``s0`` always expands ``s0`` itself and
    afterwards only unobserved nodes.
    """
    check_tree(g)
    obs = _as_observation(obs)
    check_nonempty(obs)
    s0 = obs.earliest()
    # BFS that does not pass through observers other than s0
    parent = {s0: None}
    order = [s0]
    adj = g.adjacency
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        if u != s0 and u in obs:
            continue
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
    # keep only nodes lying on a path from s0 to a reached observer
    keep = {s0}
    for s in order:
        if s in obs:
            u = s
            while u not in keep:
                keep.add(u)
                u = parent[u]
    return frozenset(keep)


def _pick(scores, region, obs, p, edge_counts) -> Estimate:
    if not scores:
        s0 = obs.earliest()
        return Estimate(s0, None, NEG_INF, frozenset(region), frozenset(), {}, True)
    best = _argmin(scores)
    ll = path_log_likelihood(scores[best], edge_counts[best], p)
    return Estimate(best, scores[best], ll, frozenset(region), frozenset(scores), scores, False)


def localize_tree(g: Network, obs, p: float = 0.5, full_sampled_set: bool = False,
                  engine: str = "reroot") -> Estimate:
    """Infection-path estimate on a tree.

    Every node of the reduced search region is tried as a root. With
    ``full_sampled_set=False`` each candidate's cascading tree spans only the
    observers inside the region; with ``True`` it spans all observers.
    Candidates whose program is infeasible are dropped and the smallest
    aggregate delay wins, lowest id on ties.

    ``engine="per_root"`` builds each cascading tree and runs message
    passing on it; ``"reroot"`` (default) gets all roots from one rerooting
    sweep over the shared subtree. Both give identical scores.
    """
    p = check_probability(p, "p")
    check_tree(g)
    obs = _as_observation(obs)
    check_nonempty(obs)
    region = reduced_search_space(g, obs)
    targets = obs.sampled if full_sampled_set else frozenset(s for s in obs.nodes if s in region)
    scores, edge_counts = {}, {}
    if engine == "per_root":
        for u in sorted(region):
            ct = build_cascading_tree(g, u, targets)
            mp = message_passing(ct, obs)
            if mp is not None:
                scores[u] = mp.aggregate_delay
                edge_counts[u] = ct.edge_count
    elif engine == "reroot":
        # region nodes all lie on the subtree spanning the targets
        span = steiner_tree(g, sorted(targets))[0] if full_sampled_set else region
        delays = rerooted_aggregate_delays(g, span, obs)
        for u in sorted(region):
            if delays[u] is not None:
                scores[u] = delays[u]
                edge_counts[u] = len(span) - 1
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return _pick(scores, region, obs, p, edge_counts)


def time_labeled_bfs(g: Network, root: int, obs) -> TimeLabeledBfsTree:
    """Breadth-first tree whose labels only admit observers in time order.

    An observer ``v`` met over edge ``(w, v)`` joins the tree only if
    ``sigma[w] < t_v``; otherwise it stays unvisited and may be admitted
    through a later edge. Unobserved nodes get ``sigma[w] + 1``.
    """
    root = check_node(g, root, "root")
    obs = _as_observation(obs)
    stamps = obs.timestamps
    sigma = {root: stamps.get(root, NEG_INF)}
    parent = {root: None}
    order = [root]
    remaining = len(stamps) - (root in stamps)
    adj = g.adjacency
    i = 0
    while i < len(order) and remaining:
        w = order[i]
        i += 1
        s_w = sigma[w]
        for v in adj[w]:
            if v in parent:
                continue
            t_v = stamps.get(v)
            if t_v is None:
                sigma[v] = s_w + 1
            elif s_w < t_v:
                sigma[v] = t_v
                remaining -= 1
            else:
                continue
            parent[v] = w
            order.append(v)
    tree = rooted_from_parents(root, order, parent)
    reached = frozenset(u for u in order if u in stamps)
    return TimeLabeledBfsTree(tree, sigma, reached)


def graph_candidate(g: Network, u: int, obs: Observation, theta: float):
    """Score root ``u`` for :func:`localize_graph`.

    Returns ``(cascading_tree, result)``; ``result`` is ``None`` when ``u``
    is screened out by ``theta`` or its program is infeasible.
    """
    tl = time_labeled_bfs(g, u, obs)
    reached = tl.reached_sampled
    if not reached or len(reached) < theta * len(obs):
        return None, None
    ct = prune_to_sampled(u, tl.tree.order, tl.tree.parent, reached)
    return ct, message_passing(ct, obs)


def localize_graph(g: Network, obs, p: float = 0.5, theta: float = 0.95) -> Estimate:
    """Infection-path heuristic for general graphs via time-labelled BFS trees.

    Roots whose tree reaches fewer than ``theta * |S|`` observers are
    skipped. If every root is skipped or infeasible the search is repeated
    once with ``theta / 2`` before falling back to the earliest observer.
    """
    p = check_probability(p, "p")
    theta = check_probability(theta, "theta", allow_one=False)
    obs = _as_observation(obs)
    check_nonempty(obs)
    region = range(g.node_count)
    for th in (theta, theta / 2):
        scores, edge_counts = {}, {}
        for u in region:
            ct, mp = graph_candidate(g, u, obs, th)
            if mp is not None:
                scores[u] = mp.aggregate_delay
                edge_counts[u] = ct.edge_count
        if scores:
            break
    return _pick(scores, region, obs, p, edge_counts)


def min_timestamp_estimator(obs, seed=None) -> int:
    """Observer with the smallest timestamp; ties settled by a fair draw."""
    obs = _as_observation(obs)
    check_nonempty(obs)
    t_min = min(obs.timestamps.values())
    winners = [s for s in obs.nodes if obs[s] == t_min]
    if len(winners) == 1:
        return winners[0]
    rng = np.random.default_rng(seed)
    return winners[int(rng.integers(len(winners)))]


class InfectionPathEstimator(BaseEstimator):
    """Estimator wrapper around :func:`localize_tree` / :func:`localize_graph`.

    ``fit`` takes the network; ``predict`` takes a sequence of observations
    and returns the estimated sources. ``method="auto"`` uses the exact tree
    search on tree-shaped networks and the BFS heuristic otherwise.
    """

    def __init__(self, p=0.5, method="auto", theta=0.95, full_sampled_set=False):
        self.p = p
        self.method = method
        self.theta = theta
        self.full_sampled_set = full_sampled_set

    def fit(self, X: Network, y=None):
        if not isinstance(X, Network):
            raise TypeError(f"fit expects a Network, got {type(X).__name__}")
        check_probability(self.p, "p")
        check_probability(self.theta, "theta", allow_one=False)
        if self.method not in ("auto", "tree", "graph"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "tree":
            check_tree(X)
        self.network_ = X
        self.method_ = self.method if self.method != "auto" else ("tree" if X.is_tree else "graph")
        return self

    def estimate(self, obs) -> Estimate:
        check_is_fitted(self, "network_")
        if self.method_ == "tree":
            return localize_tree(self.network_, obs, self.p, self.full_sampled_set)
        return localize_graph(self.network_, obs, self.p, self.theta)

    def predict(self, X) -> np.ndarray:
        return np.array([self.estimate(o).source for o in X], dtype=np.int64)

    def score(self, X, y) -> float:
        """Fraction of observations whose true source is recovered exactly."""
        return float(np.mean(self.predict(X) == np.asarray(y)))


class MinTimestampEstimator(BaseEstimator):
    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X=None, y=None):
        self.rng_ = np.random.default_rng(self.random_state)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "rng_")
        seeds = self.rng_.integers(0, 2**63 - 1, size=len(X))
        return np.array([min_timestamp_estimator(o, int(s)) for o, s in zip(X, seeds)], dtype=np.int64)

    def score(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))
