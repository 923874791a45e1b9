import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiermap import (
    adaptive_epsilon,
    check_balance,
    comm_cost,
    compute_l_max,
    from_edges,
    parse_hierarchy,
    pe_distance,
)
from hiermap._util import ceil_frac
from hiermap.instances import path_graph, random_gnm

from _brute import ancestor_distance, dense_distances, dense_weights, double_sum_cost


def test_parse_hierarchy():
    h = parse_hierarchy("4:2:3", "1:10:100")
    assert h.levels == 3 and h.k == 24
    assert h.prefix_products == (4, 8, 24)
    assert parse_hierarchy("8", "1").k == 8
    assert parse_hierarchy("4:8:6", "1:10:100").k == 192


def test_parse_hierarchy_errors():
    with pytest.raises(ValueError):
        parse_hierarchy("4:8", "1:10:100")
    with pytest.raises(ValueError):
        parse_hierarchy("4:0:3", "1:10:100")
    with pytest.raises(ValueError):
        parse_hierarchy("4:x:3", "1:10:100")
    with pytest.raises(ValueError):
        parse_hierarchy("4:2", "1:-5")


def test_pe_distance_examples():
    h = parse_hierarchy("4:2:3", "1:10:100")
    assert pe_distance(h, 0, 3) == 1
    assert pe_distance(h, 0, 5) == 10
    assert pe_distance(h, 0, 13) == 100
    assert pe_distance(h, 7, 7) == 0
    with pytest.raises(ValueError):
        pe_distance(h, 0, 24)


def test_pe_distance_exhaustive_against_ancestor_chains():
    h = parse_hierarchy("4:2:3", "1:10:100")
    for x in range(24):
        for y in range(24):
            d = pe_distance(h, x, y)
            assert d == pe_distance(h, y, x)
            assert d == ancestor_distance(h, x, y)
            assert (d == 0) == (x == y)


def test_comm_cost_examples():
    h2 = parse_hierarchy("4:2", "1:10")
    g = from_edges(2, [(0, 1, 7)])
    assert comm_cost(g, h2, np.zeros(2, dtype=np.int64)) == 0
    assert comm_cost(g, h2, np.array([0, 3])) == 14  # same processor, d=1
    assert comm_cost(g, h2, np.array([0, 5])) == 140  # across, d=10


@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
@settings(max_examples=30, deadline=None)
def test_comm_cost_matches_dense_double_sum(seed, rnd):
    n = rnd.randrange(2, 24)
    m = rnd.randrange(1, min(40, n * (n - 1) // 2) + 1)
    g = random_gnm(n, m, seed=seed, max_edge_weight=6)
    h = parse_hierarchy("2:2:2", "1:10:100")
    pi = np.array([rnd.randrange(h.k) for _ in range(n)], dtype=np.int64)
    expected = double_sum_cost(dense_weights(g), dense_distances(h), pi)
    assert comm_cost(g, h, pi) == expected


def test_compute_l_max_examples():
    assert compute_l_max(800, 8, 0.1) == 110
    assert compute_l_max(800, 2, 0.1) == 440
    assert compute_l_max(100, 1, 0.0) == 100


@given(
    st.integers(0, 10_000),
    st.integers(1, 64),
    st.fractions(min_value=0, max_value=2),
    st.fractions(min_value=0, max_value=1),
    st.integers(0, 500),
)
@settings(max_examples=80)
def test_compute_l_max_monotone(total, k, eps, eps_extra, total_extra):
    base = compute_l_max(total, k, eps)
    assert compute_l_max(total, k, eps + eps_extra) >= base
    assert compute_l_max(total + total_extra, k, eps) >= base


def test_adaptive_epsilon_paper_values():
    val, clamped = adaptive_epsilon(0.1, 8, 800, 4, 440, 1)
    assert val == Fraction(0) and not clamped

    val, clamped = adaptive_epsilon(0.1, 4, 1000, 4, 1000, 2)
    assert not clamped
    assert math.isclose(float(val), math.sqrt(1.1) - 1, abs_tol=1e-9)
    # rounded down, never above the true root
    assert (1 + val) ** 2 <= Fraction(11, 10)

    val, clamped = adaptive_epsilon(0.1, 8, 800, 4, 480, 1)
    assert val == 0 and clamped

    with pytest.raises(ValueError):
        adaptive_epsilon(0.1, 8, 800, 1, 100, 0)


def test_adaptive_epsilon_root_collapses_to_eps():
    # at the root (k' = k, c(V') = c(V), d = 1) the formula gives eps back
    val, clamped = adaptive_epsilon(0.07, 24, 5000, 24, 5000, 1)
    assert val == Fraction(7, 100) and not clamped


def test_check_balance_examples():
    g = path_graph(800)
    blocks = np.arange(800) // 100  # 8 blocks of exactly 100
    rep = check_balance(g, blocks, 8, 0.1)
    assert rep.is_balanced and rep.max_imbalance == 0 and rep.l_max == 110

    blocks = np.minimum(np.arange(800) // 97, 7)  # block 7 gets 121
    rep = check_balance(g, blocks, 8, 0.1)
    assert list(rep.block_weights)[:7] == [97] * 7
    assert rep.block_weights[7] == 121
    assert not rep.is_balanced

    blocks = np.minimum(np.arange(800) // 110, 7)
    rep = check_balance(g, blocks, 8, 0.1)
    assert rep.block_weights.max() == 110 and rep.is_balanced


def _worst_case_cascade(total, eps, arities, use_ceilings):
    """Every partition call hands one block the largest weight its cap allows."""
    k = math.prod(arities)
    weight = Fraction(total)
    for depth in range(len(arities), 0, -1):
        a = arities[depth - 1]
        k_sub = math.prod(arities[:depth])
        if use_ceilings:
            weight = Fraction(int(weight))  # partitioners see integer weights
        eps_p, _ = adaptive_epsilon(eps, k, total, k_sub, int(math.ceil(weight)), depth)
        share = (1 + eps_p) * weight / a
        weight = min(Fraction(ceil_frac(share)) if use_ceilings else share, weight)
    return weight


@given(
    st.integers(0, 10_000),
    st.randoms(use_true_random=False),
)
@settings(max_examples=50, deadline=None)
def test_adaptive_cascade_never_breaks_balance(seed, rnd):
    levels = rnd.randrange(1, 5)
    arities = []
    k = 1
    for _ in range(levels):
        a = rnd.randrange(1, 9)
        if k * a > 256:
            a = 1
        arities.append(a)
        k *= a
    total = rnd.randrange(k, 50 * k + 1)
    eps = Fraction(rnd.randrange(0, 50), 100)
    l_max = compute_l_max(total, k, eps)

    exact = _worst_case_cascade(total, eps, arities, use_ceilings=False)
    assert exact <= (1 + eps) * Fraction(total, k) <= l_max

    ceiled = _worst_case_cascade(total, eps, arities, use_ceilings=True)
    assert ceiled <= l_max + (levels - 1)
