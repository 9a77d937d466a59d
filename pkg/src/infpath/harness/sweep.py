"""Deterministic Monte Carlo sweeps over (p, q) grids."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..diffusion import DiffusionConfig, derive_seed, sample_observers, simulate_si
from ..estimators import InfectionPathEstimator, min_timestamp_estimator
from ..graph import Network, largest_component
from .generators import load_graph

__all__ = ["SweepConfig", "TrialRecord", "run_sweep", "load_config", "source_pool", "hop_distances",
           "format_csv", "write_csv", "CSV_HEADER", "ESTIMATORS"]

CSV_HEADER = ["p", "q", "estimator", "trials", "mean_dist", "detect_rate", "stderr", "empty_resamples"]
ESTIMATORS = ("infection_path", "min")
MAX_RESAMPLES = 10_000


@dataclass
class SweepConfig:
    graph: str
    p: list
    q: list
    trials: int = 500
    seed: int = 0
    estimators: list = field(default_factory=lambda: list(ESTIMATORS))
    theta: float = 0.95
    method: str = "auto"
    full_sampled_set: bool = False
    source: object = "auto"  # auto | component | internal | center | <node id>
    output: str | None = None
    records: str | None = None
    record_timing: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        self.p = [float(x) for x in np.atleast_1d(self.p)]
        self.q = [float(x) for x in np.atleast_1d(self.q)]
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        self.trials = int(self.trials)
        for name, vals in (("p", self.p), ("q", self.q)):
            for v in vals:
                if not 0.0 < v <= 1.0:
                    raise ValueError(f"{name} values must lie in (0, 1], got {v}")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}; choose from {ESTIMATORS}")


@dataclass
class TrialRecord:
    trial: int
    source: int
    estimates: dict
    distances: dict
    n_sampled: int
    feasible: int
    wall_time: float | None = None


def load_config(path) -> SweepConfig:
    """Read a sweep config from YAML or JSON (chosen by extension)."""
    import yaml

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read sweep config {path}: {exc}") from exc
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    try:
        return SweepConfig(**data)
    except TypeError as exc:
        raise ValueError(f"{path}: {exc}") from None


def source_pool(g: Network, mode="auto") -> np.ndarray:
    """Candidate true sources for a sweep.

    ``auto`` means the non-leaf nodes of a tree and the largest component
    of anything else.
    """
    if isinstance(mode, (int, np.integer)) and not isinstance(mode, bool):
        return np.array([int(mode)])
    if mode == "center":
        return np.array([g.node_count // 2])
    if mode == "auto":
        mode = "internal" if g.is_tree else "component"
    if mode == "internal":
        deg = np.array([g.degree(u) for u in range(g.node_count)])
        return np.flatnonzero(deg > 1)
    if mode == "component":
        return largest_component(g)
    raise ValueError(f"unknown source mode {mode!r}")


def hop_distances(g: Network, u: int) -> np.ndarray:
    indptr, indices, _, _ = g.csr_pattern
    mat = sparse.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(g.node_count,) * 2)
    return csgraph.shortest_path(mat, unweighted=True, indices=u, directed=False)


def _one_trial(g, cfg: SweepConfig, pool, ip, iq, k, est):
    p, q = cfg.p[ip], cfg.q[iq]
    start = time.perf_counter()
    attempt = 0
    while True:
        base = derive_seed(cfg.seed, ip, iq, k, attempt)
        rng = np.random.default_rng(derive_seed(base, 0))
        v = int(pool[rng.integers(len(pool))])
        casc = simulate_si(g, DiffusionConfig(p, v), derive_seed(base, 1))
        obs = sample_observers(casc, q, derive_seed(base, 2))
        if len(obs):
            break
        attempt += 1
        if attempt > MAX_RESAMPLES:
            raise RuntimeError(f"no observers after {MAX_RESAMPLES} resamples at q={q}")
    dist = hop_distances(g, v)
    estimates, distances, feasible = {}, {}, 0
    for name in cfg.estimators:
        if name == "infection_path":
            e = est.estimate(obs)
            vhat, feasible = e.source, len(e.feasible_set)
        else:
            vhat = min_timestamp_estimator(obs, derive_seed(base, 3))
        estimates[name] = int(vhat)
        distances[name] = int(dist[vhat])
    wall = time.perf_counter() - start if cfg.record_timing else None
    return TrialRecord(k, v, estimates, distances, len(obs), feasible, wall), attempt


def _summary_rows(cfg, ip, iq, results):
    rows = []
    resamples = sum(a for _, a in results)
    for name in cfg.estimators:
        d = np.array([r.distances[name] for r, _ in results], dtype=float)
        se = float(d.std(ddof=1) / np.sqrt(len(d))) if len(d) > 1 else 0.0
        rows.append([f"{cfg.p[ip]:g}", f"{cfg.q[iq]:g}", name, len(d),
                     f"{d.mean():.6f}", f"{np.mean(d == 0):.6f}", f"{se:.6f}", resamples])
    return rows


def run_sweep(cfg: SweepConfig, g: Network | None = None):
    """Run every (p, q) cell and return ``(rows, records)``.

    Rows follow :data:`CSV_HEADER` in grid order (p outer, q inner, then
    estimator). Writes ``cfg.output`` and ``cfg.records`` when set.
    """
    if g is None:
        g = load_graph(cfg.graph)
    pool = source_pool(g, cfg.source)
    if len(pool) == 0:
        raise ValueError("no candidate source nodes")
    rows, records = [], []
    for ip, p in enumerate(cfg.p):
        est = InfectionPathEstimator(p=p, method=cfg.method, theta=cfg.theta,
                                     full_sampled_set=cfg.full_sampled_set).fit(g)
        for iq in range(len(cfg.q)):
            if cfg.n_jobs == 1:
                results = [_one_trial(g, cfg, pool, ip, iq, k, est) for k in range(cfg.trials)]
            else:
                from joblib import Parallel, delayed

                results = Parallel(n_jobs=cfg.n_jobs)(
                    delayed(_one_trial)(g, cfg, pool, ip, iq, k, est) for k in range(cfg.trials))
            rows.extend(_summary_rows(cfg, ip, iq, results))
            for r, _ in results:
                rec = asdict(r)
                rec.update(p=p, q=cfg.q[iq])
                if rec["wall_time"] is None:
                    del rec["wall_time"]
                records.append(rec)
    if cfg.output:
        write_csv(rows, cfg.output)
    if cfg.records:
        try:
            with open(cfg.records, "w") as fh:
                for rec in records:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write trial records to {cfg.records}: {exc}") from exc
    return rows, records


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(rows, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(format_csv(rows))
    except OSError as exc:
        raise OSError(f"cannot write sweep output {path}: {exc}") from exc
