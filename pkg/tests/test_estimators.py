import numpy as np
import pytest
from sklearn.base import clone

from infpath import ContractError
from infpath.diffusion import DiffusionConfig, Observation, derive_seed, sample_observers, simulate_si
from infpath.estimators import (
    InfectionPathEstimator,
    MinTimestampEstimator,
    localize_graph,
    localize_tree,
    min_timestamp_estimator,
    reduced_search_space,
    time_labeled_bfs,
)
from infpath.graph import bfs_tree, from_edges, sampled_distance, steiner_tree
from infpath.harness.generators import generate_ba, random_tree
from infpath.lip import build_cascading_tree, message_passing
from conftest import line


def random_trial(rng, n_max=60, unobserved=None):
    while True:
        n = int(rng.integers(2, n_max + 1))
        g = random_tree(n, rng)
        v = int(rng.integers(n))
        c = simulate_si(g, DiffusionConfig(float(rng.uniform(0.2, 1)), v), int(rng.integers(2**63)))
        obs = sample_observers(c, float(rng.uniform(0.1, 0.9)), int(rng.integers(2**63)))
        if len(obs) and (unobserved is None or (v not in obs) == unobserved):
            return g, v, obs


def test_reduced_search_examples():
    g = line(7)
    assert reduced_search_space(g, Observation({2: 1, 4: 3})) == {2, 3, 4}
    everyone = Observation({u: abs(u - 3) for u in range(7)})
    assert reduced_search_space(g, everyone) == {2, 3, 4}
    # a lone observer: nothing bounds the walk, the region is the observer
    assert reduced_search_space(g, Observation({5: 0})) == {5}


def test_reduced_search_errors():
    with pytest.raises(ValueError):
        reduced_search_space(line(3), Observation({}))
    with pytest.raises(ContractError):
        reduced_search_space(from_edges(3, [(0, 1), (1, 2), (2, 0)]), Observation({0: 1}))


def test_localize_tree_line_example():
    e = localize_tree(line(7), Observation({1: 2, 5: 4}), 0.5)
    assert e.source == 2
    assert abs(e.source - 3) == 1
    assert e.source in e.feasible_set <= e.search_region


def test_singleton_observation():
    g = line(7)
    for mode in (False, True):
        assert localize_tree(g, Observation({4: 9}), 0.5, mode).source == 4


def test_estimate_invariants(rng):
    for _ in range(100):
        g, v, obs = random_trial(rng)
        e = localize_tree(g, obs, 0.5)
        assert e.source in e.feasible_set <= e.search_region
        assert e.score == min(e.scores.values())
        assert e.source == min(u for u in e.scores if e.scores[u] == e.score)
        assert not e.fallback


def test_source_observed_is_found(rng):
    for _ in range(100):
        g, v, obs = random_trial(rng, unobserved=False)
        assert localize_tree(g, obs, 0.5).source == v
        assert localize_tree(g, obs, 0.5, full_sampled_set=True).source == v


def test_s0_in_critical_set_and_region(rng):
    for _ in range(150):
        g, v, obs = random_trial(rng)
        S = obs.sampled
        s0 = obs.earliest()
        region = reduced_search_space(g, obs)
        assert sampled_distance(g, v, s0, S) == 1
        span = steiner_tree(g, S)[0]
        critical = {u for u in span if sampled_distance(g, v, u, S) == 0}
        critical |= {s for s in S if sampled_distance(g, v, s, S) == 1}
        assert s0 in critical
        assert critical <= region


def test_earliest_observer_need_not_be_feasible():
    # source 1 reaches 0 and 2 in the same slot; rooted at 0, node 2 would come too early
    g = line(4)
    obs = Observation({0: 2, 2: 2, 3: 3})
    assert obs.earliest() == 0
    assert message_passing(build_cascading_tree(g, 0, obs.sampled), obs) is None
    assert localize_tree(g, obs, 0.5).source == 1


def test_far_nodes_screened(rng):
    # nodes two or more observers away from the source are outside the region or infeasible
    for _ in range(60):
        g, v, obs = random_trial(rng, n_max=40)
        region = reduced_search_space(g, obs)
        for u in range(g.node_count):
            if sampled_distance(g, v, u, obs.sampled) >= 2 and u in region:
                assert message_passing(build_cascading_tree(g, u, obs.sampled), obs) is None


def test_time_labeled_bfs_tree_input_matches_bfs(rng):
    for _ in range(40):
        g, v, obs = random_trial(rng)
        # true timestamps seen from the source never get rejected
        tl = time_labeled_bfs(g, v, obs)
        assert tl.reached_sampled == obs.sampled
    # without rejections the tree is the BFS tree, cut once every observer is in
    g, v, obs = random_trial(rng)
    full = bfs_tree(g, v)
    tl = time_labeled_bfs(g, v, obs)
    assert tl.tree.order == full.order[: len(tl.tree.order)]
    assert all(tl.tree.parent[u] == full.parent[u] for u in tl.tree.order)


def test_time_labeled_bfs_labels():
    g = line(5)
    tl = time_labeled_bfs(g, 0, Observation({0: 3, 2: 9, 4: 4}))
    assert tl.sigma[0] == 3 and tl.sigma[1] == 4 and tl.sigma[2] == 9 and tl.sigma[3] == 10
    # 4 needs sigma_3 < 4 which fails
    assert 4 not in tl.reached_sampled and 4 not in tl.tree
    tl = time_labeled_bfs(g, 1, Observation({0: 3}))
    assert tl.sigma[1] == -np.inf and tl.reached_sampled == {0}


def test_rejected_observer_admitted_later():
    # 3 is first met from 1 (sigma 6, too late) and then from 2 (sigma 1)
    g = from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    obs = Observation({1: 6, 2: 1, 3: 4})
    tl = time_labeled_bfs(g, 0, obs)
    assert tl.tree.parent[3] == 2
    assert tl.reached_sampled == {1, 2, 3}


def test_graph_matches_tree_when_all_reached(rng):
    for _ in range(50):
        g, v, obs = random_trial(rng, n_max=40)
        e = localize_graph(g, obs, 0.5, theta=0.999)
        f = localize_tree(g, obs, 0.5, full_sampled_set=True)
        # a root that reaches every observer scores exactly as in the tree search
        for u, a in e.scores.items():
            if time_labeled_bfs(g, u, obs).reached_sampled == obs.sampled and u in f.scores:
                assert a == f.scores[u]


def test_graph_fallback_flag():
    # decreasing stamps along a line admit no root from which all are reachable in time
    g = line(3)
    e = localize_graph(g, Observation({0: 5, 2: 5}), 0.5)
    assert not e.fallback
    # equal stamps: every root reaches only itself, below theta/2 of three observers
    e = localize_graph(g, Observation({0: 1, 1: 1, 2: 1}), 0.5, theta=0.9)
    assert e.fallback and e.source == 0 and e.score is None
    assert e.feasible_set == frozenset()


def test_localize_graph_on_ba_runs():
    g = generate_ba(80, 2, 3)
    c = simulate_si(g, DiffusionConfig(0.5, 10), 1)
    obs = sample_observers(c, 0.3, 2)
    e = localize_graph(g, obs, 0.5)
    assert 0 <= e.source < 80


def test_min_estimator():
    assert min_timestamp_estimator(Observation({3: 7, 5: 4}), 0) == 5
    assert all(min_timestamp_estimator(Observation({3: 7, 5: 4}), s) == 5 for s in range(20))
    tie = Observation({1: 2, 8: 2, 4: 9})
    picks = np.array([min_timestamp_estimator(tie, derive_seed(3, s)) for s in range(10_000)])
    assert set(picks.tolist()) == {1, 8}
    assert abs(np.mean(picks == 1) - 0.5) <= 0.02
    with pytest.raises(ValueError):
        min_timestamp_estimator(Observation({}), 0)


def test_sklearn_api():
    g = line(7)
    est = InfectionPathEstimator(p=0.5)
    assert est.get_params() == {"p": 0.5, "method": "auto", "theta": 0.95, "full_sampled_set": False}
    est2 = clone(est).set_params(method="graph")
    est.fit(g)
    assert est.method_ == "tree"
    X = [Observation({1: 2, 5: 4}), Observation({3: 0})]
    assert est.predict(X).tolist() == [2, 3]
    assert est.score(X, [2, 3]) == 1.0
    assert est2.fit(g).method_ == "graph"
    with pytest.raises(ValueError):
        InfectionPathEstimator(p=2).fit(g)
    with pytest.raises(ContractError):
        InfectionPathEstimator(method="tree").fit(from_edges(3, [(0, 1), (1, 2), (2, 0)]))
    m = MinTimestampEstimator(random_state=0).fit()
    assert m.predict(X).tolist() == [1, 3]
