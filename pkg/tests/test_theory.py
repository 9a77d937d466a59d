import math

import numpy as np
import pytest

from infpath import ContractError
from infpath.diffusion import Observation
from infpath.harness.generators import generate_regular_tree
from infpath.theory import (
    LineRealization,
    LineTheory,
    candidate_path,
    fixed_point,
    line_detection_probability,
    line_error_from_sigmas,
    line_expected_distance_bound,
    line_realization,
    naive_line_stats,
    regular_tree_bound,
    sigma_diff_pmf,
)
from conftest import line


def test_detection_probability_values():
    assert line_detection_probability(0.5, 1.0) == pytest.approx(1.0)
    assert line_detection_probability(0.5, 0.5) == pytest.approx(11 / 15)
    assert line_detection_probability(0.5, 0.2) == pytest.approx(0.393939, abs=1e-6)


def test_detection_probability_from_pmf():
    # exact detection happens when |sigma1 - sigma2| <= 1
    for p, q in [(0.5, 0.5), (0.3, 0.2), (0.8, 0.6)]:
        near = sum(sigma_diff_pmf(p, q, n) for n in (-1, 0, 1))
        assert line_detection_probability(p, q) == pytest.approx(q + (1 - q) * near)


def test_distance_bound():
    assert line_expected_distance_bound(0.5, 0.5) == pytest.approx(0.48)
    assert line_expected_distance_bound(0.5, 0.999999) < 1e-5
    p, q = 0.9, 0.1
    second = 2 * (1 - p + p * q) * (1 - p) ** 2 / (p * q * (2 - 2 * p + p * q) ** 2)
    assert line_expected_distance_bound(p, q) == pytest.approx((1 - q) * min(1 / q, second))
    with pytest.raises(ValueError):
        line_expected_distance_bound(0.5, 1.0)


def test_pmf():
    assert sigma_diff_pmf(0.5, 0.5, 0) == pytest.approx(0.2)
    for n in range(1, 6):
        assert sigma_diff_pmf(0.3, 0.4, n) == sigma_diff_pmf(0.3, 0.4, -n)
    total = sum(sigma_diff_pmf(0.5, 0.5, n) for n in range(-200, 201))
    assert total >= 1 - 1e-9
    t = LineTheory(0.5, 0.5)
    assert (t.a, t.b, t.c) == (0.25, 0.75, 0.5)


def test_regular_tree_bound_values():
    r = regular_tree_bound(3, 0.5, 0.5, 1)
    assert r.x_seq == (1.0,)
    assert r.bound == pytest.approx(0.7890625)
    assert r.x_star == pytest.approx(6 - math.sqrt(32), abs=1e-10)


def test_regular_tree_iteration_monotone():
    x1 = [regular_tree_bound(3, 0.5, 0.5, D).x1 for D in range(1, 25)]
    assert all(a > b for a, b in zip(x1, x1[1:]))
    assert regular_tree_bound(3, 0.5, 0.5, 60).x1 == pytest.approx(fixed_point(3, 0.5, 0.5), abs=1e-12)
    r = regular_tree_bound(4, 0.3, 0.6, 5)
    xs = r.x_seq
    assert xs[0] == 1.0 and len(xs) == 5
    for a, b in zip(xs, xs[1:]):
        assert b == pytest.approx((1 - 0.3 + 0.3 * 0.4 * a) ** 3)


def test_h_increasing_convex():
    g, p, q = 3, 0.5, 0.5
    h = lambda x: (1 - p + p * (1 - q) * x) ** (g - 1)
    xs = np.linspace(0, 1, 201)
    hv = h(xs)
    assert np.all(np.diff(hv) > 0)
    assert np.all(np.diff(hv, 2) >= -1e-12)


@pytest.mark.parametrize("bad", [dict(g=2), dict(D=0), dict(p=1.0)])
def test_regular_tree_bound_pre(bad):
    kw = dict(g=3, p=0.5, q=0.5, D=1) | bad
    with pytest.raises(ValueError):
        regular_tree_bound(**kw)


def test_naive_stats():
    assert naive_line_stats(1.0) == (1.0, 0.0)
    assert naive_line_stats(0.5) == (0.5, 1.0)


def test_small_q_ratio():
    p, q = 0.5, 1e-4
    ratio = line_detection_probability(p, q) / q
    assert ratio == pytest.approx(1 + 3 * p / (2 * (1 - p)), rel=0.01)


def test_candidate_path_line_example():
    cp = candidate_path(line(7), 3, Observation({1: 2, 5: 4}))
    assert cp.anchor == 3 and cp.U == {1, 5} and cp.U_star == {1}
    assert cp.path_nodes == (3, 2, 1) and cp.length == 2


def test_candidate_path_symmetric():
    cp = candidate_path(line(7), 3, Observation({1: 2, 5: 2}))
    assert cp.U_star == {1, 5} and cp.path_nodes == (3,) and cp.length == 0


def test_candidate_path_tree_branches():
    g = generate_regular_tree(3, 3)
    # nodes 4 and 6 hang below different children (1 and 2) of the root
    cp = candidate_path(g, 0, Observation({4: 5, 6: 5}))
    assert cp.anchor == 0


def test_candidate_path_anchor_moves_down():
    # every observer lies behind node 1
    g = generate_regular_tree(3, 3)
    cp = candidate_path(g, 0, Observation({4: 5, 5: 7}))
    assert cp.anchor == 1 and cp.U_star == {4}
    assert cp.path_nodes == (1, 4)


def test_candidate_path_errors():
    with pytest.raises(ContractError):
        candidate_path(line(5), 2, Observation({2: 0}))
    with pytest.raises(ValueError):
        candidate_path(line(5), 2, Observation({}))


def test_line_error_examples():
    assert line_error_from_sigmas(LineRealization(2, 3, 5, 6)) == 0
    r = LineRealization(2, 2, 2, 4)
    assert (r.sigma1, r.sigma2, r.m_tilde) == (0, 2, 2)
    assert line_error_from_sigmas(r) == 1
    assert line_error_from_sigmas(LineRealization(2, 1, 2, 10)) == 2
    with pytest.raises(ValueError):
        LineRealization(0, 1, 0, 0)


def test_line_realization():
    obs = Observation({1: 2, 5: 4, 0: 9})
    r = line_realization(obs, 3, 7)
    assert (r.L1, r.L2, r.t1, r.t2) == (2, 2, 2, 4)
    assert line_realization(obs, 6, 7) is None
    assert line_realization(obs, 1, 7) is None
