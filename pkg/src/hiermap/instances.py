"""Deterministic graph generators for tests, benchmarks and demos."""

from __future__ import annotations

import math

import numpy as np

from .graph import Graph, GraphFormatError, save_metis


def from_edge_arrays(n: int, u, v, w=None, vertex_weights=None) -> Graph:
    """Vectorized Graph builder from parallel undirected edge arrays."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if w is None:
        w = np.ones(len(u), dtype=np.int64)
    else:
        w = np.asarray(w, dtype=np.int64)
    if np.any(u == v):
        raise GraphFormatError("self loop in edge list")
    srcs = np.concatenate([u, v])
    tgts = np.concatenate([v, u])
    wgts = np.concatenate([w, w])
    order = np.lexsort((tgts, srcs))
    srcs, tgts, wgts = srcs[order], tgts[order], wgts[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, srcs + 1, 1)
    offsets = np.cumsum(offsets)
    if vertex_weights is None:
        vertex_weights = np.ones(n, dtype=np.int64)
    return Graph(offsets, tgts, vertex_weights, wgts)


def path_graph(n: int, edge_weight: int = 1) -> Graph:
    idx = np.arange(n - 1, dtype=np.int64)
    return from_edge_arrays(n, idx, idx + 1, np.full(n - 1, edge_weight, dtype=np.int64))


def cycle_graph(n: int) -> Graph:
    idx = np.arange(n, dtype=np.int64)
    return from_edge_arrays(n, idx, (idx + 1) % n)


def grid_graph(rows: int, cols: int) -> Graph:
    ids = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    horiz = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()])
    vert = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()])
    u = np.concatenate([horiz[0], vert[0]])
    v = np.concatenate([horiz[1], vert[1]])
    return from_edge_arrays(rows * cols, u, v)


def complete_graph(n: int) -> Graph:
    u, v = np.triu_indices(n, k=1)
    return from_edge_arrays(n, u.astype(np.int64), v.astype(np.int64))


def star_graph(leaves: int) -> Graph:
    v = np.arange(1, leaves + 1, dtype=np.int64)
    return from_edge_arrays(leaves + 1, np.zeros(leaves, dtype=np.int64), v)


def two_cliques(size: int, bridged: bool = False) -> Graph:
    u1, v1 = np.triu_indices(size, k=1)
    edges_u = [u1, u1 + size]
    edges_v = [v1, v1 + size]
    if bridged:
        edges_u.append(np.array([size - 1]))
        edges_v.append(np.array([size]))
    return from_edge_arrays(
        2 * size,
        np.concatenate(edges_u).astype(np.int64),
        np.concatenate(edges_v).astype(np.int64),
    )


def random_gnm(
    n: int, m: int, seed: int, max_edge_weight: int = 1, max_vertex_weight: int = 1
) -> Graph:
    """Uniform random simple graph with m edges (deterministic per seed)."""
    rng = np.random.default_rng(seed)
    total_pairs = n * (n - 1) // 2
    if m > total_pairs:
        raise ValueError("too many edges requested")
    if total_pairs < 4_000_000:
        chosen = rng.choice(total_pairs, size=m, replace=False)
    else:
        chosen = np.unique(rng.integers(0, total_pairs, size=int(m * 1.2) + 16))
        chosen = rng.permutation(chosen)[:m]
        if len(chosen) < m:
            raise ValueError("edge sampling fell short; request fewer edges")
    # invert the pair index: u is the largest row with row-offset <= index
    u = ((1 + np.sqrt(1 + 8 * chosen.astype(np.float64))) / 2).astype(np.int64)
    # guard against float rounding at row boundaries
    for _ in range(2):
        too_big = u * (u - 1) // 2 > chosen
        u[too_big] -= 1
        too_small = (u + 1) * u // 2 <= chosen
        u[too_small] += 1
    v = (chosen - u * (u - 1) // 2).astype(np.int64)
    w = (
        rng.integers(1, max_edge_weight + 1, size=m)
        if max_edge_weight > 1
        else np.ones(m, dtype=np.int64)
    )
    vw = (
        rng.integers(1, max_vertex_weight + 1, size=n)
        if max_vertex_weight > 1
        else np.ones(n, dtype=np.int64)
    )
    return from_edge_arrays(n, u, v, w, vertex_weights=vw)


def random_geometric(n: int, seed: int, radius: float | None = None) -> Graph:
    """Random points in the unit square, edges below the connection radius."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    r = radius if radius is not None else 0.55 * math.sqrt(math.log(n) / n)
    ncell = max(1, int(1.0 / r))
    cell = (pts[:, 0] * ncell).astype(np.int64) * ncell + (pts[:, 1] * ncell).astype(
        np.int64
    )
    order = np.argsort(cell, kind="stable")
    sorted_cells = cell[order]
    uniq, starts = np.unique(sorted_cells, return_index=True)
    starts = np.append(starts, n)
    slot = {int(c): (int(starts[i]), int(starts[i + 1])) for i, c in enumerate(uniq)}

    r2 = r * r
    us_list: list[np.ndarray] = []
    vs_list: list[np.ndarray] = []
    offsets = (0, 1, ncell - 1, ncell, ncell + 1)
    for c, (lo, hi) in slot.items():
        a_idx = order[lo:hi]
        for off in offsets:
            nb = slot.get(c + off)
            if nb is None:
                continue
            b_idx = order[nb[0]:nb[1]]
            if off == 0:
                ii, jj = np.triu_indices(len(a_idx), k=1)
                cand_u, cand_v = a_idx[ii], a_idx[jj]
            else:
                cand_u = np.repeat(a_idx, len(b_idx))
                cand_v = np.tile(b_idx, len(a_idx))
            if len(cand_u) == 0:
                continue
            d = pts[cand_u] - pts[cand_v]
            keep = (d * d).sum(axis=1) <= r2
            us_list.append(cand_u[keep])
            vs_list.append(cand_v[keep])
    u = np.concatenate(us_list) if us_list else np.empty(0, dtype=np.int64)
    v = np.concatenate(vs_list) if vs_list else np.empty(0, dtype=np.int64)
    return from_edge_arrays(n, u, v)


def write_metis(g: Graph, path: str) -> None:
    with open(path, "w") as fh:
        save_metis(g, fh)
