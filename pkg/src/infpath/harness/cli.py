"""Command-line entry point: ``infpath <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ..diffusion import Cascade, DiffusionConfig, Observation, sample_observers, simulate_si
from ..estimators import InfectionPathEstimator, min_timestamp_estimator
from ..theory import (
    line_detection_probability,
    line_expected_distance_bound,
    naive_line_stats,
    regular_tree_bound,
)
from .generators import load_graph
from .sweep import format_csv, load_config, run_sweep
from .validate import KINDS, validate


def _ids(g):
    return {lab: i for i, lab in enumerate(g.labels)} if g.labels is not None else None


def _node_arg(g, token):
    ids = _ids(g)
    if ids is not None:
        if token not in ids:
            raise SystemExit(f"error: node {token!r} not in graph")
        return ids[token]
    return int(token)


def _emit(text, path):
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise SystemExit(f"error: cannot write {path}: {exc}")


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc}")


def cmd_simulate(args):
    g = load_graph(args.graph)
    src = _node_arg(g, args.source)
    c = simulate_si(g, DiffusionConfig(args.p, src), args.seed, method=args.method)
    doc = {"node_count": g.node_count, "labels": list(g.labels) if g.labels else None}
    doc.update(c.to_dict(g.labels))
    _emit(json.dumps(doc, indent=2), args.out)


def cmd_observe(args):
    doc = json.loads(_read(args.cascade))
    labels = doc.get("labels")
    ids = {lab: i for i, lab in enumerate(labels)} if labels else None
    c = Cascade.from_dict(doc, doc["node_count"], ids)
    obs = sample_observers(c, args.q, args.seed)
    _emit(obs.to_json(labels), args.out)


def _name(g, v):
    return g.labels[v] if g.labels is not None else int(v)


def _finite(x):
    return x if math.isfinite(x) else None


def cmd_estimate(args):
    g = load_graph(args.graph)
    obs = Observation.from_json(_read(args.obs), _ids(g))
    if args.method == "min":
        v = min_timestamp_estimator(obs, args.seed)
        out = {"source": _name(g, v), "score": obs[v], "method": "min"}
    else:
        est = InfectionPathEstimator(p=args.p, method=args.method, theta=args.theta,
                                     full_sampled_set=args.full_sampled_set).fit(g)
        e = est.estimate(obs)
        out = {"source": _name(g, e.source), "score": e.score,
               "log_likelihood": _finite(e.log_likelihood), "fallback": e.fallback,
               "method": est.method_, "candidates": len(e.search_region), "feasible": len(e.feasible_set)}
    print(json.dumps(out))


def cmd_sweep(args):
    cfg = load_config(args.config)
    if args.out:
        cfg.output = args.out
    rows, _ = run_sweep(cfg)
    if not cfg.output:
        sys.stdout.write(format_csv(rows))


def cmd_theory(args):
    if args.kind == "line":
        out = {"detection_probability": line_detection_probability(args.p, args.q)}
        if args.p < 1 and args.q < 1:
            out["expected_distance_bound"] = line_expected_distance_bound(args.p, args.q)
    elif args.kind == "tree":
        r = regular_tree_bound(args.g, args.p, args.q, args.depth_bound)
        out = {"bound": r.bound, "x1": r.x1, "x_star": r.x_star, "x_seq": list(r.x_seq)}
    else:
        rate, dist = naive_line_stats(args.q)
        out = {"detection_probability": rate, "expected_distance": dist}
    print(json.dumps(out))


def cmd_validate(args):
    verdict = validate(args.kind, args.trials, args.seed, p=args.p, q=args.q,
                       g=args.g, depth=args.depth, D=args.D)
    print(json.dumps(verdict, default=lambda x: x.item() if isinstance(x, np.generic) else str(x)))
    return 0 if verdict["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="infpath", description="Diffusion source localisation toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="run one SI cascade")
    s.add_argument("--graph", required=True, help="edge-list path or gen:<kind>:... spec")
    s.add_argument("--source", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--method", choices=["race", "slots"], default="race")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("observe", help="sample observers from a cascade file")
    s.add_argument("--cascade", required=True)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_observe)

    s = sub.add_parser("estimate", help="estimate the source from an observation file")
    s.add_argument("--graph", required=True)
    s.add_argument("--obs", required=True)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--theta", type=float, default=0.95)
    s.add_argument("--method", choices=["auto", "tree", "graph", "min"], default="auto")
    s.add_argument("--full-sampled-set", action="store_true")
    s.add_argument("--seed", type=int, default=0, help="tie-break seed for --method min")
    s.set_defaults(fn=cmd_estimate)

    s = sub.add_parser("sweep", help="run a (p, q) sweep from a YAML/JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="CSV path (overrides the config)")
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("theory", help="evaluate closed-form accuracy formulas")
    s.add_argument("--kind", choices=["line", "tree", "min"], required=True)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--g", type=int, default=3)
    s.add_argument("--depth-bound", type=int, default=1)
    s.set_defaults(fn=cmd_theory)

    s = sub.add_parser("validate", help="Monte Carlo check against a closed form")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--g", type=int, default=3)
    s.add_argument("--depth", type=int, default=10)
    s.add_argument("--D", type=int, default=1)
    s.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
