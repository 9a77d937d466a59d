"""Undirected simple graphs over dense integer ids, plus tree path queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ._validation import check_node, check_nonempty, check_tree

__all__ = [
    "Network",
    "RootedTree",
    "from_edges",
    "read_edgelist",
    "write_edgelist",
    "bfs_tree",
    "tree_path",
    "steiner_tree",
    "sampled_distance",
    "largest_component",
]


class Network:
    """Immutable undirected simple graph with nodes ``0 .. node_count-1``.

    Build instances with :func:`from_edges` or :func:`read_edgelist`; the
    constructor trusts its input. ``labels`` optionally maps dense ids back to
    the tokens of an ingested edge list.
    """

    __slots__ = ("node_count", "adjacency", "edge_count", "labels", "__dict__")

    def __init__(self, node_count: int, adjacency: tuple, labels: Sequence[str] | None = None):
        self.node_count = node_count
        self.adjacency = adjacency
        self.edge_count = sum(len(a) for a in adjacency) // 2
        self.labels = tuple(labels) if labels is not None else None

    def __repr__(self):
        return f"Network(node_count={self.node_count}, edge_count={self.edge_count}, is_tree={self.is_tree})"

    def __len__(self):
        return self.node_count

    def neighbors(self, u: int) -> tuple:
        return self.adjacency[u]

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def edges(self):
        """Yield each edge once as ``(u, v)`` with ``u < v``."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(edge_count, 2)`` int array of the edges from :meth:`edges`."""
        arr = np.fromiter((x for e in self.edges() for x in e), dtype=np.int64, count=2 * self.edge_count)
        return arr.reshape(-1, 2)

    @cached_property
    def csr_pattern(self):
        """Symmetric CSR pattern plus, per stored entry, the index of its edge."""
        e = self.edge_array
        m = len(e)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((cols, rows))
        rows, cols, eid = rows[order], cols[order], eid[order]
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, cols.astype(np.int32), eid, rows

    @cached_property
    def is_tree(self) -> bool:
        if self.node_count == 0 or self.edge_count != self.node_count - 1:
            return False
        return len(_bfs_order(self, 0)) == self.node_count

    @cached_property
    def _tree_index(self):
        # parent/depth arrays rooted at node 0; only meaningful on trees
        parent = np.full(self.node_count, -1, dtype=np.int64)
        depth = np.zeros(self.node_count, dtype=np.int64)
        _bfs_order(self, 0, parent=parent, depth=depth)
        return parent.tolist(), depth.tolist()

    def component_labels(self) -> np.ndarray:
        indptr, indices, _, _ = self.csr_pattern
        mat = sparse.csr_matrix(
            (np.ones(len(indices), dtype=np.int8), indices, indptr),
            shape=(self.node_count, self.node_count),
        )
        _, labels = csgraph.connected_components(mat, directed=False)
        return labels

    def label_of(self, u: int) -> str:
        return self.labels[u] if self.labels is not None else str(u)


def _bfs_order(g: Network, root: int, parent=None, depth=None) -> list:
    seen = bytearray(g.node_count)
    seen[root] = 1
    order = [root]
    adj = g.adjacency
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for v in adj[u]:
            if not seen[v]:
                seen[v] = 1
                order.append(v)
                if parent is not None:
                    parent[v] = u
                    depth[v] = depth[u] + 1
    return order


def from_edges(n: int, edges: Iterable, labels: Sequence[str] | None = None) -> Network:
    """Build a :class:`Network` from node count and an iterable of pairs.

    Duplicate edges (in either orientation) are merged; self-loops and
    out-of-range endpoints raise ``ValueError``.
    """
    if n < 0:
        raise ValueError(f"node count must be non-negative, got {n}")
    nbrs = [set() for _ in range(n)]
    for e in edges:
        u, v = (int(x) for x in e)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise ValueError(f"self-loop at node {u}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    return Network(n, tuple(tuple(sorted(s)) for s in nbrs), labels)


def read_edgelist(path) -> Network:
    """Parse a SNAP-style edge list.

    One edge per line as two whitespace-separated tokens; ``#`` lines and
    blank lines are skipped. Tokens become dense ids in order of first
    appearance and the original tokens are kept in ``Network.labels``.
    """
    ids: dict[str, int] = {}
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected two node tokens, got {line!r}")
            a, b = parts[0], parts[1]
            for tok in (a, b):
                if tok not in ids:
                    ids[tok] = len(ids)
            if a != b:
                edges.append((ids[a], ids[b]))
    labels = sorted(ids, key=ids.get)
    return from_edges(len(ids), edges, labels=labels)


def write_edgelist(g: Network, path) -> None:
    with open(path, "w") as fh:
        for u, v in g.edges():
            fh.write(f"{g.label_of(u)} {g.label_of(v)}\n")


def largest_component(g: Network) -> np.ndarray:
    """Sorted node ids of the largest connected component (lowest label on ties)."""
    if g.node_count == 0:
        return np.zeros(0, dtype=np.int64)
    labels = g.component_labels()
    counts = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(counts)))


@dataclass(frozen=True)
class RootedTree:
    """A directed tree stored as per-node dictionaries.

    Nodes absent from ``parent`` are not part of the tree. ``order`` lists
    the tree's nodes so that every parent precedes its children.
    """

    root: int
    parent: dict
    children: dict
    depth: dict
    order: list = field(repr=False)

    def __contains__(self, u):
        return u in self.parent

    def __len__(self):
        return len(self.order)

    @property
    def nodes(self):
        return self.order

    def edges(self):
        for u in self.order:
            for c in self.children[u]:
                yield u, c

    @property
    def edge_count(self) -> int:
        return len(self.order) - 1

    def path_from_root(self, u: int) -> list:
        path = [u]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path

    def leaves(self):
        return [u for u in self.order if not self.children[u]]


def rooted_from_parents(root: int, order: list, parent: dict) -> RootedTree:
    """Assemble a :class:`RootedTree` from a parent-before-child order."""
    children = {u: [] for u in order}
    depth = {root: 0}
    for u in order:
        p = parent[u]
        if p is not None:
            children[p].append(u)
            depth[u] = depth[p] + 1
    return RootedTree(root, parent, children, depth, order)


def bfs_tree(g: Network, root: int) -> RootedTree:
    """Breadth-first tree of ``root``'s component, neighbors in ascending id."""
    root = check_node(g, root, "root")
    parent = {root: None}
    order = [root]
    adj = g.adjacency
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
    return rooted_from_parents(root, order, parent)


def tree_path(g: Network, u: int, v: int) -> list:
    """Unique simple path ``[u, ..., v]`` on a tree-shaped network."""
    check_tree(g)
    u = check_node(g, u, "u")
    v = check_node(g, v, "v")
    parent, depth = g._tree_index
    left, right = [u], [v]
    a, b = u, v
    while depth[a] > depth[b]:
        a = parent[a]
        left.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        right.append(b)
    while a != b:
        a, b = parent[a], parent[b]
        left.append(a)
        right.append(b)
    right.pop()
    right.reverse()
    return left + right


def steiner_tree(g: Network, S) -> tuple[set, set]:
    """Minimal subtree of a tree spanning ``S`` as ``(nodes, edges)``.

    Edges are returned as ``(min, max)`` pairs.
    """
    check_tree(g)
    S = list(S)
    check_nonempty(S)
    for s in S:
        check_node(g, s, "sampled node")
    t = bfs_tree(g, S[0])
    nodes = {S[0]}
    edges = set()
    for s in S[1:]:
        u = s
        while u not in nodes:
            p = t.parent[u]
            nodes.add(u)
            edges.add((min(u, p), max(u, p)))
            u = p
    return nodes, edges


def sampled_distance(g: Network, u: int, v: int, S) -> int:
    """Number of nodes of ``S`` on the tree path between ``u`` and ``v``."""
    S = S if isinstance(S, (set, frozenset, dict)) else set(S)
    return sum(1 for w in tree_path(g, u, v) if w in S)

