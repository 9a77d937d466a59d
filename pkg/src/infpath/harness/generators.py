"""Synthetic networks and the ``gen:`` graph-spec parser."""
from __future__ import annotations

import os

import networkx as nx

from ..graph import Network, from_edges, read_edgelist

__all__ = [
    "generate_line",
    "generate_regular_tree",
    "generate_er",
    "generate_ba",
    "random_tree",
    "regular_tree_depth_for",
    "load_graph",
]


def generate_line(n: int) -> Network:
    """Path ``0 - 1 - ... - (n-1)``."""
    if n < 2:
        raise ValueError(f"a line needs n >= 2 nodes, got {n}")
    return from_edges(n, ((i, i + 1) for i in range(n - 1)))


def generate_regular_tree(g: int, depth: int) -> Network:
    """Complete tree whose internal nodes all have degree ``g``; root is node 0.

    Nodes are numbered level by level, so node ids increase with depth.
    """
    if g < 3:
        raise ValueError(f"g must be >= 3, got {g}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    edges = []
    level = [0]
    nxt = 1
    for d in range(depth):
        new = []
        fan = g if d == 0 else g - 1
        for u in level:
            for _ in range(fan):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        level = new
    return from_edges(nxt, edges)


def regular_tree_depth_for(g: int, internal: int = 1024) -> int:
    """Smallest depth whose complete g-regular tree has ``>= internal`` non-leaf nodes."""
    depth, count, level = 1, 1, g
    while count < internal:
        depth += 1
        count += level
        level *= g - 1
    return depth


def _from_nx(G) -> Network:
    return from_edges(G.number_of_nodes(), G.edges())


def generate_er(n: int, m: int, seed: int) -> Network:
    """``m`` distinct edges drawn uniformly from the ``n(n-1)/2`` pairs."""
    if m > n * (n - 1) // 2:
        raise ValueError(f"{m} edges do not fit on {n} nodes")
    return _from_nx(nx.gnm_random_graph(n, m, seed=seed))


def generate_ba(n: int, m_attach: int, seed: int) -> Network:
    """Preferential attachment; each new node brings ``m_attach`` edges."""
    if m_attach < 1 or m_attach >= n:
        raise ValueError(f"need 1 <= m_attach < n, got m_attach={m_attach}, n={n}")
    return _from_nx(nx.barabasi_albert_graph(n, m_attach, seed=seed))


def random_tree(n: int, rng) -> Network:
    """Uniform labelled tree on ``n`` nodes from a random Pruefer sequence."""
    if n < 2:
        raise ValueError(f"a tree needs n >= 2 nodes, got {n}")
    seq = rng.integers(0, n, size=n - 2).tolist()
    return _from_nx(nx.from_prufer_sequence(seq)) if n > 2 else from_edges(2, [(0, 1)])


def load_graph(spec: str) -> Network:
    """Build a network from ``gen:line:n``, ``gen:rt:g:depth``,
    ``gen:er:n:m:seed``, ``gen:ba:n:m:seed`` or an edge-list path."""
    if not spec.startswith("gen:"):
        if not os.path.exists(spec):
            raise FileNotFoundError(f"graph file not found: {spec}")
        return read_edgelist(spec)
    kind, *args = spec.split(":")[1:]
    try:
        vals = [int(a) for a in args]
    except ValueError:
        raise ValueError(f"bad generator spec {spec!r}: arguments must be integers") from None
    table = {"line": (generate_line, 1), "rt": (generate_regular_tree, 2),
             "er": (generate_er, 3), "ba": (generate_ba, 3)}
    if kind not in table:
        raise ValueError(f"unknown generator {kind!r} in {spec!r}")
    fn, arity = table[kind]
    if len(vals) != arity:
        raise ValueError(f"generator {kind!r} takes {arity} arguments, got {len(vals)}")
    return fn(*vals)
