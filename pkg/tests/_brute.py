"""Independent brute-force oracles used to freeze expected test values.

Deliberately dumb: plain loops over dense matrices and full assignment
enumerations, sharing no code path with the implementations they check.
"""

import itertools

import numpy as np

from hiermap import compute_l_max


def dense_weights(g) -> np.ndarray:
    """Symmetric n x n matrix of undirected edge weights."""
    c = np.zeros((g.n, g.n), dtype=np.int64)
    for v in range(g.n):
        for e in range(int(g.offsets[v]), int(g.offsets[v + 1])):
            c[v, int(g.targets[e])] += int(g.edge_weights[e])
    return c


def ancestor_distance(h, x: int, y: int) -> int:
    """PE distance from explicit ancestor chains (independent of pe_distance)."""
    if x == y:
        return 0
    chain_x = []
    chain_y = []
    cx, cy = x, y
    for a in h.arities:
        cx //= a
        cy //= a
        chain_x.append(cx)
        chain_y.append(cy)
    for i, (ax, ay) in enumerate(zip(chain_x, chain_y)):
        if ax == ay:
            return h.distances[i]
    raise AssertionError("no common ancestor")


def dense_distances(h) -> np.ndarray:
    k = h.k
    d = np.zeros((k, k), dtype=np.int64)
    for x in range(k):
        for y in range(k):
            d[x, y] = ancestor_distance(h, x, y)
    return d


def double_sum_cost(c: np.ndarray, d: np.ndarray, pi) -> int:
    total = 0
    n = len(pi)
    for i in range(n):
        for j in range(n):
            total += int(c[i, j]) * int(d[pi[i], pi[j]])
    return total


def pairwise_cut(g, blocks) -> int:
    """Cut as a sum over unordered vertex pairs of the dense weight matrix."""
    c = dense_weights(g)
    cut = 0
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if blocks[u] != blocks[v]:
                cut += int(c[u, v])
    return cut


def min_cut(g, a: int, eps) -> int:
    """Exhaustive minimum a-way cut over all cap-respecting assignments."""
    l_max = compute_l_max(int(g.vertex_weights.sum()), a, eps)
    best = None
    for assign in itertools.product(range(a), repeat=g.n):
        weights = [0] * a
        ok = True
        for v, b in enumerate(assign):
            weights[b] += int(g.vertex_weights[v])
            if weights[b] > l_max:
                ok = False
                break
        if not ok or any(w == 0 for w in weights):
            continue
        cut = pairwise_cut(g, assign)
        if best is None or cut < best:
            best = cut
    return best


def min_mapping_cost(g, h, eps) -> int:
    """Exhaustive minimum communication cost over balanced assignments."""
    k = h.k
    l_max = compute_l_max(int(g.vertex_weights.sum()), k, eps)
    c = dense_weights(g)
    d = dense_distances(h)
    best = None
    for assign in itertools.product(range(k), repeat=g.n):
        weights = [0] * k
        ok = True
        for v, pe in enumerate(assign):
            weights[pe] += int(g.vertex_weights[v])
            if weights[pe] > l_max:
                ok = False
                break
        if not ok:
            continue
        cost = double_sum_cost(c, d, assign)
        if best is None or cost < best:
            best = cost
    return best
