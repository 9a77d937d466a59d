"""Closed-form accuracy formulas for line and regular-tree networks, and the candidate path."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._validation import ContractError, check_node, check_nonempty, check_probability, check_tree
from .diffusion import Observation
from .graph import Network, tree_path

__all__ = [
    "LineTheory",
    "RegularTreeBound",
    "CandidatePath",
    "LineRealization",
    "line_detection_probability",
    "line_expected_distance_bound",
    "sigma_diff_pmf",
    "regular_tree_bound",
    "naive_line_stats",
    "candidate_path",
    "line_error_from_sigmas",
    "line_realization",
    "fixed_point",
]

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_STEPS = 10**6


def _open_unit(x, name):
    return check_probability(x, name, allow_one=False)


@dataclass(frozen=True)
class LineTheory:
    """Shorthands ``a = pq``, ``b = 1-p+pq`` and ``c = 1-p`` for the line analysis."""

    p: float
    q: float

    @property
    def a(self) -> float:
        return self.p * self.q

    @property
    def b(self) -> float:
        return 1.0 - self.p + self.p * self.q

    @property
    def c(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class RegularTreeBound:
    g: int
    p: float
    q: float
    D: int
    x_seq: tuple  # x_D, x_{D-1}, ..., x_1
    x_star: float
    bound: float

    @property
    def x1(self) -> float:
        return self.x_seq[-1]


@dataclass(frozen=True)
class CandidatePath:
    anchor: int
    U: frozenset
    U_star: frozenset
    path_nodes: tuple

    @property
    def length(self) -> int:
        return len(self.path_nodes) - 1


@dataclass(frozen=True)
class LineRealization:
    """Nearest observers on both sides of the source of a line cascade."""

    L1: int
    L2: int
    t1: int
    t2: int

    def __post_init__(self):
        if self.L1 < 1 or self.L2 < 1:
            raise ValueError("distances to the nearest observers must be at least 1")

    @property
    def sigma1(self) -> int:
        return self.t1 - self.L1

    @property
    def sigma2(self) -> int:
        return self.t2 - self.L2

    @property
    def m_tilde(self) -> int:
        if self.sigma1 < self.sigma2:
            return self.L1
        if self.sigma1 > self.sigma2:
            return self.L2
        return 0


def line_detection_probability(p: float, q: float) -> float:
    """Exact-detection probability of the infection-path estimator on the infinite line."""
    p = check_probability(p, "p")
    q = check_probability(q, "q")
    num = p * q * (p * q + 3 - 3 * p)
    den = (p * q + 2 - 2 * p) * (p * q + 1 - p)
    return q + (1 - q) * num / den


def line_expected_distance_bound(p: float, q: float) -> float:
    """Upper bound on the mean hop error on the infinite line."""
    p = _open_unit(p, "p")
    q = _open_unit(q, "q")
    second = 2 * (1 - p + p * q) * (1 - p) ** 2 / (p * q * (2 - 2 * p + p * q) ** 2)
    return (1 - q) * min(1 / q, second)


def sigma_diff_pmf(p: float, q: float, n: int) -> float:
    """P(sigma1 - sigma2 = n); a two-sided geometric law."""
    t = LineTheory(_open_unit(p, "p"), _open_unit(q, "q"))
    a, b, c = t.a, t.b, t.c
    return a * a / (b * b - c * c) * (c / b) ** abs(int(n))


def _h(x, g, p, q):
    return (1 - p + p * (1 - q) * x) ** (g - 1)


def fixed_point(g: int, p: float, q: float, tol: float = FIXED_POINT_TOL, max_steps: int = FIXED_POINT_MAX_STEPS) -> float:
    """Iterate ``h`` from 1 until successive values differ by less than ``tol``."""
    x = 1.0
    for _ in range(max_steps):
        nxt = _h(x, g, p, q)
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    return x


def regular_tree_bound(g: int, p: float, q: float, D: int) -> RegularTreeBound:
    """Lower bound on P(error <= D) for the g-regular tree."""
    if int(g) != g or g < 3:
        raise ValueError(f"g must be an integer >= 3, got {g!r}")
    if int(D) != D or D < 1:
        raise ValueError(f"D must be an integer >= 1, got {D!r}")
    g, D = int(g), int(D)
    p = _open_unit(p, "p")
    q = _open_unit(q, "q")
    xs = [1.0]
    for _ in range(D - 1):
        xs.append(_h(xs[-1], g, p, q))
    x1 = xs[-1]
    bound = 1 - (1 - q) * (1 - p + p * (1 - q) * x1) ** g
    return RegularTreeBound(g, p, q, D, tuple(xs), fixed_point(g, p, q), bound)


def naive_line_stats(q: float) -> tuple[float, float]:
    """Detection probability and mean error of the minimum-timestamp rule on the line."""
    q = check_probability(q, "q")
    return q, (1 - q) / q


def line_error_from_sigmas(r: LineRealization) -> int:
    return min(abs(r.sigma1 - r.sigma2) // 2, r.m_tilde)


def line_realization(obs: Observation, v_star: int, n: int):
    """Realization around ``v_star`` on the path ``0 - 1 - ... - (n-1)``.

    Returns ``None`` when one side of the source holds no observer (the
    finite line was too short for this trial) or when ``v_star`` is observed.
    """
    if v_star in obs:
        return None
    left = [s for s in obs.nodes if s < v_star]
    right = [s for s in obs.nodes if s > v_star]
    if not left or not right:
        return None
    s1, s2 = left[-1], right[0]
    return LineRealization(v_star - s1, s2 - v_star, obs[s1], obs[s2])


def _common_prefix(paths):
    first = paths[0]
    k = min(len(x) for x in paths)
    out = []
    for i in range(k):
        u = first[i]
        if any(x[i] != u for x in paths):
            break
        out.append(u)
    return out


def candidate_path(g: Network, v_star: int, obs: Observation) -> CandidatePath:
    """Candidate path of an unobserved source on a tree.

    ``U`` holds the observers first met on the way out of ``v_star``; the
    anchor is the end of the common part of the paths to them; ``U_star``
    minimises ``t_s - d(anchor, s)`` and the path is the common part of the
    anchor's paths to ``U_star``.
    """
    check_tree(g)
    v_star = check_node(g, v_star, "v_star")
    check_nonempty(obs)
    if v_star in obs:
        raise ContractError("candidate path is defined for an unobserved source only")
    parent = {v_star: None}
    order = [v_star]
    U = []
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        if u in obs:
            U.append(u)
            continue
        for w in g.adjacency[u]:
            if w not in parent:
                parent[w] = u
                order.append(w)
    if not U:
        raise ValueError("no observer is reachable from the source")

    def path_to(s):
        out = [s]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out[::-1]

    anchor = _common_prefix([path_to(s) for s in U])[-1]
    from_anchor = {s: tree_path(g, anchor, s) for s in U}
    key = {s: obs[s] - (len(from_anchor[s]) - 1) for s in U}
    best = min(key.values())
    U_star = [s for s in sorted(U) if key[s] == best]
    nodes = _common_prefix([from_anchor[s] for s in U_star])
    return CandidatePath(anchor, frozenset(U), frozenset(U_star), tuple(nodes))
