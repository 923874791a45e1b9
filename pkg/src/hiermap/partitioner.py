"""Multilevel edge-cut partitioner: matching-based coarsening, greedy
growing for the coarsest graphs, FM refinement on the way back up, and a
seeded best-of portfolio to exploit a thread budget.

Everything is a pure function of its inputs; a given (graph, a, imbalance,
budget, config, seed) always produces the same result no matter how many
hardware threads execute the portfolio.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as k
from ._util import ceil_frac, frac_root_floor, split_seed, to_fraction
from .graph import Graph, edge_cut, extract_subgraph, total_weight
from .topology import compute_l_max

# Budget beyond initial_attempts * BUDGET_SCALING buys nothing: extra
# attempts have sharply diminishing returns at desk scale.
BUDGET_SCALING = 4

_PRESETS = {
    "fast": dict(initial_attempts=4, fm_passes=2, coarsen_stop_threshold=60),
    "eco": dict(initial_attempts=8, fm_passes=4, coarsen_stop_threshold=80),
    "strong": dict(initial_attempts=16, fm_passes=8, coarsen_stop_threshold=120),
}


@dataclass(frozen=True)
class PartitionConfig:
    """Tunables of the multilevel engine. Use preset() for the named trade-offs."""

    preset: str = "eco"
    coarsen_stop_threshold: int = 80
    max_coarsen_rounds: int = 40
    initial_attempts: int = 8
    fm_passes: int = 4
    stagnation_ratio: float = 0.98

    def __post_init__(self):
        if min(self.coarsen_stop_threshold, self.max_coarsen_rounds,
               self.initial_attempts, self.fm_passes) < 1:
            raise ValueError("all counts must be >= 1")
        if not 0.0 < self.stagnation_ratio < 1.0:
            raise ValueError("stagnation_ratio must lie in (0, 1)")

    @classmethod
    def from_preset(cls, name: str) -> "PartitionConfig":
        if name not in _PRESETS:
            raise ValueError(f"unknown preset {name!r}; pick one of {sorted(_PRESETS)}")
        return cls(preset=name, **_PRESETS[name])


@dataclass
class PartitionResult:
    block_ids: np.ndarray
    achieved_cut: int
    achieved_max_block_weight: int
    met_balance: bool


def coarsen_once(g: Graph, seed: int) -> tuple[Graph, np.ndarray]:
    """One round of heavy-edge matching plus edge contraction.

    Returns the coarser graph and the fine-to-coarse vertex map.  Matched
    pairs merge weights; parallel edges created by contraction merge by
    weight addition.
    """
    if g.n < 2:
        raise ValueError("need at least two vertices to coarsen")
    perm = k.seeded_permutation(g.n, np.uint64(seed))
    match = k.match_heavy_edge(g.offsets, g.targets, g.edge_weights, perm)
    cmap, nc = k.coarse_ids_from_match(match)
    coff, ctgt, cew, cvw = k.contract(
        g.offsets, g.targets, g.edge_weights, g.vertex_weights, cmap, nc
    )
    return Graph._trusted(coff, ctgt, cvw, cew), cmap


def initial_bipartition(g: Graph, target_weight_0: int, eps, seed: int) -> np.ndarray:
    """Grow block 0 from a seeded random start until it reaches target_weight_0.

    The block absorbs the boundary vertex with the highest internal-gain
    preference; eps bounds the overshoot via a cap of
    ceil((1 + eps) * target_weight_0).
    """
    cap0 = ceil_frac((1 + to_fraction(eps)) * Fraction(target_weight_0))
    return _grow(g, target_weight_0, cap0, seed)


def _grow(g: Graph, target0: int, cap0: int, seed: int) -> np.ndarray:
    perm = k.seeded_permutation(g.n, np.uint64(seed))
    return k.grow_block(
        g.offsets, g.targets, g.edge_weights, g.vertex_weights, perm, target0, cap0
    )


def fm_refine(
    g: Graph, block_ids, l_max_each: tuple[int, int], passes: int, seed: int = 0
) -> np.ndarray:
    """FM refinement of a 2-way assignment; never increases the cut.

    The pass order is fully deterministic (descending gain, lower id on
    ties), so the seed has no effect; it is accepted for interface symmetry
    with the other pipeline stages.
    """
    del seed
    blocks = np.array(block_ids, dtype=np.int64, copy=True)
    if len(blocks) != g.n:
        raise ValueError("block_ids length must equal vertex count")
    l0, l1 = int(l_max_each[0]), int(l_max_each[1])
    k.fm_refine_passes(
        g.offsets, g.targets, g.edge_weights, g.vertex_weights, blocks, l0, l1, passes
    )
    return blocks


def _multilevel_bisect(
    g: Graph, target0: int, cap0: int, cap1: int, cfg: PartitionConfig, seed: int
) -> np.ndarray:
    """Full coarsen / grow / refine pipeline for a single weighted bisection."""
    levels: list[tuple[Graph, np.ndarray]] = []
    cur = g
    for round_ in range(cfg.max_coarsen_rounds):
        if cur.n <= 2 * cfg.coarsen_stop_threshold or cur.n < 2:
            break
        coarser, cmap = coarsen_once(cur, split_seed(seed, 1, round_))
        if coarser.n >= cfg.stagnation_ratio * cur.n:
            break
        levels.append((cur, cmap))
        cur = coarser

    best_blocks = None
    best_key = None
    for attempt in range(cfg.initial_attempts):
        blocks = _grow(cur, target0, cap0, split_seed(seed, 2, attempt))
        k.rebalance_two_way(
            cur.offsets, cur.targets, cur.edge_weights, cur.vertex_weights,
            blocks, cap0, cap1,
        )
        cut = k.fm_refine_passes(
            cur.offsets, cur.targets, cur.edge_weights, cur.vertex_weights,
            blocks, cap0, cap1, cfg.fm_passes,
        )
        w0 = int(cur.vertex_weights[blocks == 0].sum())
        w1 = int(cur.vertex_weights.sum()) - w0
        key = (max(w0 - cap0, w1 - cap1, 0), cut, attempt)
        if best_key is None or key < best_key:
            best_key = key
            best_blocks = blocks
    blocks = best_blocks

    for fine, cmap in reversed(levels):
        blocks = blocks[cmap]
        k.rebalance_two_way(
            fine.offsets, fine.targets, fine.edge_weights, fine.vertex_weights,
            blocks, cap0, cap1,
        )
        k.fm_refine_passes(
            fine.offsets, fine.targets, fine.edge_weights, fine.vertex_weights,
            blocks, cap0, cap1, cfg.fm_passes,
        )

    _ensure_both_sides(g, blocks)
    return blocks


def _ensure_both_sides(g: Graph, blocks: np.ndarray) -> None:
    """Move one minimum-weight vertex if a side came out vertex-empty."""
    if g.n < 2:
        return
    for side in (0, 1):
        if not (blocks == side).any():
            donors = np.flatnonzero(blocks == 1 - side)
            pick = donors[np.argmin(g.vertex_weights[donors])]
            blocks[pick] = side


def recursive_split(g: Graph, a: int, eps_prime, cfg: PartitionConfig, seed: int) -> np.ndarray:
    """a-way partition by recursive bisection with proportional targets.

    Odd a splits into ceil(a/2) : floor(a/2) with weight targets in the same
    proportion so every final block aims at the same ideal weight; the
    per-bisection imbalance is rescaled from the remaining bisection depth
    the same way the hierarchy driver rescales across levels.  Block ids of
    the left subtree occupy [0, ceil(a/2)).
    """
    if a < 2:
        raise ValueError("recursive_split needs a >= 2")
    eps_prime = to_fraction(eps_prime)
    total = total_weight(g)
    # per final block budget; every subtree of m blocks may weigh at most
    # roughly m * block_budget during the descent
    block_budget = (1 + eps_prime) * Fraction(total, a)
    out = np.full(g.n, -1, dtype=np.int64)
    _split_rec(g, np.arange(g.n, dtype=np.int64), a, block_budget, cfg, seed, 0, out)
    return out


def _split_rec(
    g: Graph,
    vertices: np.ndarray,
    m: int,
    block_budget: Fraction,
    cfg: PartitionConfig,
    seed: int,
    label_offset: int,
    out: np.ndarray,
) -> None:
    if m == 1:
        out[vertices] = label_offset
        return
    if g.n == 0:
        return
    if g.n <= m:
        # too few vertices to bisect further: heaviest vertices spread first
        order = np.lexsort((np.arange(g.n), -g.vertex_weights))
        for i, v in enumerate(order):
            out[vertices[v]] = label_offset + min(i, m - 1)
        return
    w = total_weight(g)
    m_left = (m + 1) // 2
    m_right = m // 2
    if w == 0:
        # weightless subgraph: balance by vertex count only
        out[vertices] = label_offset + np.arange(g.n) % m
        return

    depth = max(1, math.ceil(math.log2(m)))
    ratio = block_budget * Fraction(m, w)
    growth = frac_root_floor(ratio, depth) if ratio >= 1 else Fraction(1)
    cap0 = ceil_frac(growth * Fraction(w * m_left, m))
    cap1 = ceil_frac(growth * Fraction(w * m_right, m))
    target0 = -((-w * m_left) // m)

    blocks = _multilevel_bisect(g, target0, cap0, cap1, cfg, split_seed(seed, 3))
    left = extract_subgraph(g, blocks, 0)
    right = extract_subgraph(g, blocks, 1)
    _split_rec(
        left.subgraph, vertices[left.local_to_global], m_left, block_budget,
        cfg, split_seed(seed, 4), label_offset, out,
    )
    _split_rec(
        right.subgraph, vertices[right.local_to_global], m_right, block_budget,
        cfg, split_seed(seed, 5), label_offset + m_left, out,
    )


def _fill_empty_blocks(g: Graph, blocks: np.ndarray, a: int) -> None:
    """Every block in [0, a) must own a vertex when a <= n; steal cheapest ones."""
    counts = np.bincount(blocks, minlength=a)
    for b in range(a):
        while counts[b] == 0:
            donor = int(np.argmax(counts))
            members = np.flatnonzero(blocks == donor)
            pick = members[np.argmin(g.vertex_weights[members])]
            blocks[pick] = b
            counts[donor] -= 1
            counts[b] += 1


def partition(
    g: Graph,
    a: int,
    eps_prime,
    budget: int,
    cfg: PartitionConfig,
    seed: int,
    workers: int | None = None,
    probe=None,
) -> PartitionResult:
    """Best-of-seeds a-way partition within imbalance eps_prime.

    The portfolio runs min(budget, initial_attempts * BUDGET_SCALING)
    independent attempts, concurrently up to `budget` workers (`workers`
    caps the actual pool without changing results), and keeps the attempt
    with the smallest cut, ties broken by balance then attempt index.
    """
    if a < 1:
        raise ValueError("block count must be >= 1")
    if budget < 1:
        raise ValueError("thread budget must be >= 1")
    if g.n == 0:
        raise ValueError("cannot partition an empty graph")
    total = total_weight(g)
    if total == 0:
        raise ValueError("cannot partition a graph of total weight 0")
    if a > g.n:
        raise ValueError("more blocks than vertices")

    if a == 1:
        blocks = np.zeros(g.n, dtype=np.int64)
        return PartitionResult(blocks, 0, total, True)

    eps_prime = to_fraction(eps_prime)
    l_max = compute_l_max(total, a, eps_prime)
    attempts = max(1, min(budget, cfg.initial_attempts * BUDGET_SCALING))

    def run_attempt(i: int):
        if probe is not None:
            probe.attempt_enter()
        try:
            blocks = recursive_split(g, a, eps_prime, cfg, split_seed(seed, 6, i))
            _fill_empty_blocks(g, blocks, a)
            cut = edge_cut(g, blocks)
            max_w = int(
                np.bincount(blocks, weights=g.vertex_weights, minlength=a).max()
            )
            return cut, max(0, max_w - l_max), i, max_w, blocks
        finally:
            if probe is not None:
                probe.attempt_exit()

    if attempts == 1:
        results = [run_attempt(0)]
    else:
        pool_size = min(workers if workers is not None else budget, attempts)
        if pool_size <= 1:
            results = [run_attempt(i) for i in range(attempts)]
        else:
            with ThreadPoolExecutor(max_workers=pool_size) as pool:
                results = list(pool.map(run_attempt, range(attempts)))

    cut, excess, _, max_w, blocks = min(results, key=lambda r: r[:3])
    return PartitionResult(blocks, cut, max_w, excess == 0)
