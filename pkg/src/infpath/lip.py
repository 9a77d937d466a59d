"""Cascading trees and the integer program for their most likely timestamps.

For a cascading tree rooted at ``v`` the program is

    minimise   sum over edges (i, j) of t(j) - t(i)
    subject to t(s) = t_s for observed s,  t(j) - t(i) >= 1,  t integer,

and :func:`message_passing` solves it exactly in one leaves-to-root sweep.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from ._validation import ContractError, check_node, check_nonempty, check_probability
from .graph import Network, RootedTree, rooted_from_parents

__all__ = [
    "CascadingTree",
    "MessagePassingResult",
    "build_cascading_tree",
    "prune_to_sampled",
    "message_passing",
    "path_log_likelihood",
    "rerooted_aggregate_delays",
    "brute_force_lip",
]


@dataclass(frozen=True)
class CascadingTree:
    tree: RootedTree
    sampled_in_tree: frozenset
    edge_count: int

    @property
    def root(self) -> int:
        return self.tree.root


@dataclass(frozen=True)
class MessagePassingResult:
    virtual_timestamps: dict
    aggregate_delay: int


def prune_to_sampled(root: int, order: list, parent: dict, sampled) -> CascadingTree:
    """Cut a rooted tree down to the union of root-to-``sampled`` paths.

    ``order`` must list parents before children; ``sampled`` is the set of
    observed nodes to keep (all must appear in ``parent``).
    """
    keep = set()
    for u in sampled:
        while u is not None and u not in keep:
            keep.add(u)
            u = parent[u]
    keep.add(root)
    kept_order = [u for u in order if u in keep]
    tree = rooted_from_parents(root, kept_order, {u: parent[u] for u in kept_order})
    return CascadingTree(tree, frozenset(sampled), len(kept_order) - 1)


def build_cascading_tree(g: Network, v: int, S) -> CascadingTree:
    """BFS tree from ``v`` pruned so that every leaf is in ``S``.

    The search stops as soon as all of ``S`` has been discovered.
    """
    v = check_node(g, v, "root")
    targets = set(S)
    check_nonempty(targets)
    missing = set(targets)
    missing.discard(v)
    parent = {v: None}
    order = [v]
    adj = g.adjacency
    i = 0
    while missing and i < len(order):
        u = order[i]
        i += 1
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
                missing.discard(w)
    if missing:
        raise ValueError(f"sampled nodes {sorted(missing)[:5]} are not reachable from {v}")
    return prune_to_sampled(v, order, parent, targets)


def message_passing(ct: CascadingTree, obs: Mapping[int, int]):
    """Solve the timestamp program on ``ct``; ``None`` when it is infeasible.

    ``obs`` maps observed nodes to timestamps (an ``Observation`` works).
    Nodes are visited children-first, so deep chains need no recursion.
    """
    tree = ct.tree
    children = tree.children
    sampled = ct.sampled_in_tree
    tau = {}
    agg = {}
    for u in reversed(tree.order):
        kids = children[u]
        if not kids:
            if u not in sampled:
                raise ValueError(f"leaf {u} of the cascading tree is not a sampled node")
            try:
                tau[u] = obs[u]
            except KeyError:
                raise ValueError(f"no timestamp for sampled node {u}") from None
            agg[u] = 0
            continue
        t_u = min(tau[j] for j in kids) - 1
        if u in sampled:
            try:
                t_obs = obs[u]
            except KeyError:
                raise ValueError(f"no timestamp for sampled node {u}") from None
            if t_u < t_obs:
                return None
            t_u = t_obs
        tau[u] = t_u
        agg[u] = sum(agg[j] + tau[j] - t_u for j in kids)
    return MessagePassingResult(tau, agg[tree.root])


def _merge(vals, t_obs):
    # fold child messages (tau, agg, ok) into the message of their parent
    if not vals:
        return t_obs, 0, t_obs is not None
    tau = min(v[0] for v in vals) - 1
    ok = all(v[2] for v in vals)
    if t_obs is not None:
        ok = ok and tau >= t_obs
        tau = t_obs
    return tau, sum(v[1] + v[0] for v in vals) - len(vals) * tau, ok


def rerooted_aggregate_delays(g: Network, nodes, obs: Mapping[int, int]) -> dict:
    """Optimal total delay of the program for every root in a subtree at once.

    ``nodes`` must induce a subtree of the tree ``g`` whose leaves are all
    observed; then the cascading tree of each ``u`` in ``nodes`` is that
    subtree rooted at ``u``. One downward and one upward sweep give the
    result of :func:`message_passing` for all roots; infeasible roots map to
    ``None``.
    """
    nodes = set(nodes)
    check_nonempty(nodes, "node set")
    root = min(nodes)
    parent = {root: None}
    order = [root]
    adj = g.adjacency
    nbrs = {}
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        nbrs[u] = [w for w in adj[u] if w in nodes]
        for w in nbrs[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
    if len(order) != len(nodes):
        raise ValueError("node set does not induce a connected subtree")
    stamp = {u: obs[u] if u in obs else None for u in order}
    for u in order:
        if len(nbrs[u]) == 1 and stamp[u] is None and len(nodes) > 1:
            raise ValueError(f"leaf {u} of the subtree is not a sampled node")

    down = {}  # message of u towards its parent
    for u in reversed(order):
        down[u] = _merge([down[c] for c in nbrs[u] if c != parent[u]], stamp[u])
    up = {}  # message of parent(u) towards u
    out = {}
    for u in order:
        msgs = [(c, down[c]) for c in nbrs[u] if c != parent[u]]
        if parent[u] is not None:
            msgs.append((parent[u], up[u]))
        full = _merge([m for _, m in msgs], stamp[u])
        out[u] = full[1] if full[2] else None
        if not msgs:
            continue
        # exclude one neighbour at a time using the two smallest taus
        taus = sorted((m[0], c) for c, m in msgs)
        total = sum(m[1] + m[0] for _, m in msgs)
        bad = sum(not m[2] for _, m in msgs)
        k = len(msgs) - 1
        for c, m in msgs:
            if c == parent[u]:
                continue
            if k == 0:
                up[c] = (stamp[u], 0, stamp[u] is not None)
                continue
            tau = (taus[1][0] if taus[0][1] == c else taus[0][0]) - 1
            ok = bad - (not m[2]) == 0
            if stamp[u] is not None:
                ok = ok and tau >= stamp[u]
                tau = stamp[u]
            up[c] = (tau, total - m[1] - m[0] - k * tau, ok)
    return out


def path_log_likelihood(mp, edge_count: int, p: float) -> float:
    """Log-probability of the best labelled cascading tree.

    ``mp`` is a :class:`MessagePassingResult` or a bare aggregate delay.
    Returns ``-inf`` for impossible delay totals when ``p == 1``.
    """
    p = check_probability(p, "p")
    a = mp.aggregate_delay if isinstance(mp, MessagePassingResult) else int(mp)
    if p == 1.0:
        return 0.0 if a == edge_count else -math.inf
    return (a - edge_count) * math.log1p(-p) + edge_count * math.log(p)


BRUTE_FORCE_CAP = 10**8


def brute_force_lip(ct: CascadingTree, obs: Mapping[int, int], slack: int = 1):
    """Exhaustive search for the optimum of the timestamp program.

    Every unobserved node takes integer values in
    ``[min t_s - height - slack, max t_s]``; assignments are enumerated
    parent-first and rejected edge by edge. Returns the minimal total delay,
    or ``None`` if no assignment satisfies the constraints.
    """
    tree = ct.tree
    order = tree.order
    sampled = ct.sampled_in_tree
    free = [u for u in order if u not in sampled]
    if len(free) > 10:
        raise ContractError(f"brute force limited to 10 free nodes, got {len(free)}")
    fixed = {s: obs[s] for s in sampled}
    if not fixed:
        raise ValueError("cascading tree has no sampled nodes")
    height = max(tree.depth.values())
    lo = min(fixed.values()) - height - slack
    hi = max(fixed.values())
    if (hi - lo + 1) ** len(free) > BRUTE_FORCE_CAP:
        raise ContractError("brute-force search space exceeds the hard cap")

    # every constraint is checked once, on the edge into the later-assigned node
    assign = dict(fixed)
    for s in sampled:
        p = tree.parent[s]
        if p is not None and p in sampled and fixed[s] - fixed[p] < 1:
            return None
    parent = tree.parent
    kids_fixed = {u: [c for c in tree.children[u] if c in sampled] for u in free}
    best = None
    values = range(lo, hi + 1)

    def search(k):
        nonlocal best
        if k == len(free):
            total = sum(assign[c] - assign[u] for u, c in tree.edges())
            if best is None or total < best:
                best = total
            return
        u = free[k]
        par = parent[u]
        for val in values:
            # parents of free nodes precede them in ``order``, so they are set
            if par is not None and val - assign[par] < 1:
                continue
            if any(assign[c] - val < 1 for c in kids_fixed[u]):
                continue
            assign[u] = val
            search(k + 1)
        assign.pop(u, None)

    search(0)
    return best

