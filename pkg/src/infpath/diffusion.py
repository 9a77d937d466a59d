"""Discrete-time SI cascades with geometric per-edge delays, and observer sampling."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ._validation import check_node, check_probability
from .graph import Network

__all__ = [
    "DiffusionConfig",
    "Cascade",
    "Observation",
    "simulate_si",
    "sample_observers",
    "derive_seed",
    "NOT_INFECTED",
]

NOT_INFECTED = np.iinfo(np.int64).min

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Mix a master seed with integer keys into an independent 64-bit seed."""
    h = _splitmix64(int(master) & _MASK64)
    for k in keys:
        h = _splitmix64(h ^ (int(k) & _MASK64))
    return h


@dataclass(frozen=True)
class DiffusionConfig:
    p: float
    source: int
    t0: int = 0

    def __post_init__(self):
        check_probability(self.p, "p")
        if int(self.t0) != self.t0:
            raise ValueError(f"t0 must be an integer slot, got {self.t0!r}")


@dataclass(frozen=True, eq=False)
class Cascade:
    """First-infection slots and infection parents of one SI run.

    ``first_infection[u]`` is ``NOT_INFECTED`` for nodes outside the source's
    component; ``infection_parent[u]`` is -1 for the source and those nodes.
    """

    first_infection: np.ndarray
    infection_parent: np.ndarray
    source: int

    @property
    def infected(self) -> np.ndarray:
        return self.first_infection != NOT_INFECTED

    @property
    def t0(self) -> int:
        return int(self.first_infection[self.source])

    def timestamp(self, u: int):
        t = self.first_infection[u]
        return None if t == NOT_INFECTED else int(t)

    def to_dict(self, labels=None) -> dict:
        name = (lambda u: labels[u]) if labels is not None else (lambda u: int(u))
        inf = np.flatnonzero(self.infected)
        return {
            "source": name(self.source),
            "first_infection": {str(name(u)): int(self.first_infection[u]) for u in inf},
            "infection_parent": {
                str(name(u)): (None if self.infection_parent[u] < 0 else name(self.infection_parent[u]))
                for u in inf
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping, n: int, ids=None) -> "Cascade":
        to_id = (lambda x: ids[str(x)]) if ids is not None else (lambda x: int(x))
        first = np.full(n, NOT_INFECTED, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        for k, t in data["first_infection"].items():
            first[to_id(k)] = int(t)
        for k, par in data.get("infection_parent", {}).items():
            if par is not None:
                parent[to_id(k)] = to_id(par)
        return cls(first, parent, to_id(data["source"]))


class Observation:
    """Sampled observers and their first-infection timestamps.

    Behaves as a read-only mapping ``node -> timestamp``; ``nodes`` lists the
    observers in ascending id order.
    """

    __slots__ = ("timestamps", "nodes")

    def __init__(self, timestamps: Mapping[int, int]):
        self.timestamps = {int(k): int(v) for k, v in sorted(timestamps.items())}
        self.nodes = tuple(self.timestamps)

    def __len__(self):
        return len(self.timestamps)

    def __contains__(self, u):
        return u in self.timestamps

    def __getitem__(self, u):
        return self.timestamps[u]

    def __iter__(self):
        return iter(self.nodes)

    def __eq__(self, other):
        return isinstance(other, Observation) and self.timestamps == other.timestamps

    def __repr__(self):
        return f"Observation({len(self)} nodes)"

    @property
    def sampled(self) -> frozenset:
        return frozenset(self.timestamps)

    def earliest(self) -> int:
        """Observer with the smallest timestamp, lowest id among ties."""
        if not self.timestamps:
            raise ValueError("sampled set must be non-empty")
        return min(self.timestamps, key=lambda s: (self.timestamps[s], s))

    def restrict(self, nodes) -> "Observation":
        return Observation({u: self.timestamps[u] for u in nodes if u in self.timestamps})

    def to_json(self, labels=None) -> str:
        name = (lambda u: labels[u]) if labels is not None else (lambda u: u)
        doc = {
            "nodes": [name(u) for u in self.nodes],
            "timestamps": {str(name(u)): t for u, t in self.timestamps.items()},
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str, ids=None) -> "Observation":
        doc = json.loads(text)
        to_id = (lambda x: ids[str(x)]) if ids is not None else (lambda x: int(x))
        stamps = {to_id(k): int(v) for k, v in doc["timestamps"].items()}
        nodes = {to_id(x) for x in doc.get("nodes", stamps)}
        if nodes != set(stamps):
            raise ValueError("observation 'nodes' and 'timestamps' keys disagree")
        return cls(stamps)


def simulate_si(g: Network, cfg: DiffusionConfig, seed: int, method: str = "race") -> Cascade:
    """Run one SI cascade from ``cfg.source`` until its component is infected.

    ``method="race"`` draws one Geometric(p) delay per edge and takes first
    passage times (vectorised Dijkstra). ``method="slots"`` steps slot by
    slot with one Bernoulli(p) draw per infected neighbour, in ascending
    neighbour order. Both give the same law of ``(first_infection,
    infection_parent)``; they consume the random stream differently, so a
    given seed yields different realisations across methods.
    Same-slot parent ties go to the lowest neighbour id in both.
    """
    source = check_node(g, cfg.source, "source")
    if method == "race":
        return _simulate_race(g, cfg.p, source, int(cfg.t0), np.random.default_rng(seed))
    if method == "slots":
        return _simulate_slots(g, cfg.p, source, int(cfg.t0), np.random.default_rng(seed))
    raise ValueError(f"unknown simulation method {method!r}")


def _simulate_race(g, p, source, t0, rng):
    n = g.node_count
    delays = rng.geometric(p, size=g.edge_count).astype(np.float64)
    indptr, indices, eid, rows = g.csr_pattern
    w = delays[eid]
    mat = sparse.csr_matrix((w, indices, indptr), shape=(n, n))
    dist = csgraph.dijkstra(mat, directed=True, indices=source)
    reached = np.isfinite(dist)
    first = np.full(n, NOT_INFECTED, dtype=np.int64)
    first[reached] = dist[reached].astype(np.int64) + t0

    # an arc u->v could have carried the infection iff t_u + w == t_v
    cols = indices.astype(np.int64)
    ok = reached[rows] & reached[cols]
    ok[ok] = dist[rows[ok]] + w[ok] == dist[cols[ok]]
    parent = np.full(n, n, dtype=np.int64)
    np.minimum.at(parent, cols[ok], rows[ok])
    parent[parent == n] = -1
    parent[source] = -1
    return Cascade(first, parent, source)


def _simulate_slots(g, p, source, t0, rng):
    n = g.node_count
    adj = g.adjacency
    first = np.full(n, NOT_INFECTED, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    first[source] = t0
    infected = {source}
    boundary = set(adj[source])
    slot = t0
    random = rng.random
    while boundary:
        slot += 1
        newly = {}
        for v in sorted(boundary):
            hits = [u for u in adj[v] if u in infected and random() < p]
            if hits:
                newly[v] = hits[0]
        for v, u in newly.items():
            first[v] = slot
            parent[v] = u
            infected.add(v)
            boundary.discard(v)
        for v in newly:
            boundary.update(w for w in adj[v] if w not in infected)
    return Cascade(first, parent, source)


def sample_observers(c: Cascade, q: float, seed: int) -> Observation:
    """Keep each infected node independently with probability ``q``."""
    q = check_probability(q, "q")
    rng = np.random.default_rng(seed)
    keep = (rng.random(len(c.first_infection)) < q) & c.infected
    nodes = np.flatnonzero(keep)
    return Observation(dict(zip(nodes.tolist(), c.first_infection[nodes].tolist())))
