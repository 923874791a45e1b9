"""Exhaustive optimal-mapping search for tiny instances.

The assignment objective is NP-hard, so this is only feasible for a
handful of vertices; it exists to check the heuristic pipeline.  Symmetry
over interchangeable PEs (any permutation of sibling subtrees preserves
the distance matrix) is pruned by a first-touch canonical form, and a
monotone partial-cost bound cuts the rest.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, total_weight
from .topology import Hierarchy, compute_l_max, pe_distance

N_CAP = 14
K_CAP = 8


def dense_distance_matrix(h: Hierarchy) -> np.ndarray:
    k = h.k
    d = np.zeros((k, k), dtype=np.int64)
    for x in range(k):
        for y in range(k):
            d[x, y] = pe_distance(h, x, y)
    return d


def brute_force_best_mapping(
    g: Graph, h: Hierarchy, eps
) -> tuple[int, np.ndarray]:
    """Minimum communication cost over all balanced assignments, with a witness.

    Enumerates assignments vertex by vertex (heaviest communicators first),
    skipping PE choices that break the balance cap, revisit an untouched
    subtree before its earlier siblings, or cannot beat the best cost found.
    """
    if g.n > N_CAP:
        raise ValueError(f"oracle capped at {N_CAP} vertices, got {g.n}")
    k = h.k
    if k > K_CAP:
        raise ValueError(f"oracle capped at {K_CAP} PEs, got {k}")
    if g.n == 0:
        raise ValueError("empty graph")

    l_max = compute_l_max(total_weight(g), k, eps)
    dist = dense_distance_matrix(h)

    # assign high-traffic vertices first: tightens the bound early
    traffic = np.zeros(g.n, dtype=np.int64)
    src = g.sources()
    np.add.at(traffic, src, g.edge_weights)
    order = sorted(range(g.n), key=lambda v: (-traffic[v], v))

    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for e in range(g.num_directed_entries):
        adj[src[e]].append((int(g.targets[e]), int(g.edge_weights[e])))

    prefix = (1,) + h.prefix_products  # prefix[i] = leaves per level-i subtree
    arities = h.arities
    levels = h.levels
    vw = g.vertex_weights

    pe_weight = [0] * k
    # vertices assigned per subtree, per level (level 0 = single PEs)
    occupancy = [[0] * (k // prefix[i]) for i in range(levels + 1)]
    assignment = [-1] * g.n
    best_cost = None
    best_assignment = None
    pos = [-1] * g.n  # position of order[i]
    for i, v in enumerate(order):
        pos[v] = i

    def canonical_ok(x: int) -> bool:
        # a subtree may receive its first vertex only after every earlier
        # sibling subtree is non-empty
        for i in range(levels):
            sub = x // prefix[i]
            if occupancy[i][sub] == 0:
                if sub % arities[i] != 0 and occupancy[i][sub - 1] == 0:
                    return False
        return True

    def dfs(i: int, cost: int):
        nonlocal best_cost, best_assignment
        if best_cost is not None and cost >= best_cost:
            return
        if i == g.n:
            best_cost = cost
            best_assignment = list(assignment)
            return
        v = order[i]
        for x in range(k):
            if pe_weight[x] + vw[v] > l_max:
                continue
            if not canonical_ok(x):
                continue
            added = 0
            for u, w in adj[v]:
                if assignment[u] >= 0:
                    added += 2 * w * dist[x, assignment[u]]
            if best_cost is not None and cost + added >= best_cost:
                continue
            assignment[v] = x
            pe_weight[x] += vw[v]
            for lvl in range(levels + 1):
                occupancy[lvl][x // prefix[lvl]] += 1
            dfs(i + 1, cost + added)
            assignment[v] = -1
            pe_weight[x] -= vw[v]
            for lvl in range(levels + 1):
                occupancy[lvl][x // prefix[lvl]] -= 1

    dfs(0, 0)
    if best_cost is None:
        raise ValueError("no balanced assignment exists")
    return int(best_cost), np.asarray(best_assignment, dtype=np.int64)
