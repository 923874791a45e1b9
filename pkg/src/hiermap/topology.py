"""Hardware hierarchy model: PE distances, balance accounting, adaptive imbalance.

A topology is a uniform tree given as arities ``a_1:...:a_l`` (processor
level first) with per-level distances ``d_1:...:d_l``.  PEs are numbered
contiguously in depth-first order, so ``x // prefix_i`` is the id of x's
ancestor at level i and two PEs share their level-i ancestor iff those
quotients agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._util import ceil_frac, frac_root_floor, to_fraction
from .graph import Graph, total_weight


@dataclass(frozen=True)
class Hierarchy:
    """Arities and distances per level; k is the total PE count."""

    arities: tuple[int, ...]
    distances: tuple[int, ...]

    def __post_init__(self):
        if len(self.arities) == 0 or len(self.arities) != len(self.distances):
            raise ValueError("arities and distances must be non-empty and equally long")
        if any(a < 1 for a in self.arities):
            raise ValueError("every arity must be >= 1")
        if any(d < 0 for d in self.distances):
            raise ValueError("distances must be non-negative")

    @property
    def levels(self) -> int:
        return len(self.arities)

    @property
    def k(self) -> int:
        p = 1
        for a in self.arities:
            p *= a
        return p

    @property
    def prefix_products(self) -> tuple[int, ...]:
        out = []
        p = 1
        for a in self.arities:
            p *= a
            out.append(p)
        return tuple(out)

    def __str__(self) -> str:
        return ":".join(str(a) for a in self.arities)

    def distance_string(self) -> str:
        return ":".join(str(d) for d in self.distances)


@dataclass
class Mapping:
    """Assignment of each task vertex to a PE id in [0, k)."""

    assignment: np.ndarray
    k: int

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if len(self.assignment) and (
            self.assignment.min() < 0 or self.assignment.max() >= self.k
        ):
            raise ValueError("PE id out of range")

    def __len__(self) -> int:
        return len(self.assignment)


@dataclass
class BalanceReport:
    block_weights: np.ndarray
    l_max: int
    max_imbalance: Fraction
    is_balanced: bool


def parse_hierarchy(h_text: str, d_text: str) -> Hierarchy:
    """Parse colon-separated arity and distance strings like "4:8:6", "1:10:100"."""

    def ints(text: str, what: str) -> list[int]:
        try:
            return [int(tok) for tok in text.split(":")]
        except ValueError as exc:
            raise ValueError(f"non-integer token in {what} string {text!r}") from exc

    arities = ints(h_text, "hierarchy")
    distances = ints(d_text, "distance")
    if len(arities) != len(distances):
        raise ValueError(
            f"hierarchy has {len(arities)} levels but distance has {len(distances)}"
        )
    if any(a <= 0 for a in arities):
        raise ValueError("arities must be positive")
    if any(d < 0 for d in distances):
        raise ValueError("distances must be non-negative")
    return Hierarchy(tuple(arities), tuple(distances))


def pe_distance(h: Hierarchy, x: int, y: int) -> int:
    """Distance d_i for the smallest level i at which x and y share an ancestor."""
    k = h.k
    if not (0 <= x < k and 0 <= y < k):
        raise ValueError(f"PE id out of range [0, {k})")
    if x == y:
        return 0
    for prefix, dist in zip(h.prefix_products, h.distances):
        if x // prefix == y // prefix:
            return dist
    raise AssertionError("unreachable: top level always shared")


def _entry_distances(h: Hierarchy, pu: np.ndarray, pv: np.ndarray) -> np.ndarray:
    dist = np.zeros(len(pu), dtype=np.int64)
    remaining = pu != pv
    for prefix, d in zip(h.prefix_products, h.distances):
        share = (pu // prefix) == (pv // prefix)
        dist[remaining & share] = d
        remaining &= ~share
    return dist


def comm_cost(g: Graph, h: Hierarchy, mapping: Mapping | np.ndarray) -> int:
    """Total communication cost over ordered task pairs.

    Both directions of every edge are stored, so summing weight times PE
    distance over all directed entries equals the double sum over ordered
    pairs exactly.
    """
    pe = mapping.assignment if isinstance(mapping, Mapping) else np.asarray(mapping)
    if len(pe) != g.n:
        raise ValueError("mapping length must equal vertex count")
    if g.num_directed_entries == 0:
        return 0
    pu = pe[g.sources()]
    pv = pe[g.targets]
    return int((g.edge_weights * _entry_distances(h, pu, pv)).sum())


def compute_l_max(total: int, k: int, eps) -> int:
    """Maximum allowed block weight: ceil((1 + eps) * total / k), exact rationals."""
    if total < 0 or k < 1:
        raise ValueError("need total >= 0 and k >= 1")
    eps = to_fraction(eps)
    if eps < 0:
        raise ValueError("imbalance must be non-negative")
    return ceil_frac((1 + eps) * Fraction(total, k))


def adaptive_epsilon(
    eps, k: int, total: int, k_sub: int, sub_total: int, depth: int
) -> tuple[Fraction, bool]:
    """Rescaled imbalance for partitioning a subgraph at the given depth.

    Returns ``(eps_prime, clamped)`` where
    ``eps_prime = ((1 + eps) * k_sub * total / (k * sub_total)) ** (1/depth) - 1``.
    If the subgraph is already heavier than its worst-case budget the formula
    goes negative; the value is then clamped to 0 and ``clamped`` is True so
    callers can flag the balance risk.  depth == 1 is exact; deeper roots are
    rational lower bounds (30 decimal digits), which preserves the guarantee.
    """
    if depth < 1:
        raise ValueError("leaf tasks are never partitioned (depth must be >= 1)")
    if sub_total < 1:
        raise ValueError("subgraph weight must be positive")
    eps = to_fraction(eps)
    ratio = (1 + eps) * Fraction(k_sub * total, k * sub_total)
    if ratio < 1:
        return Fraction(0), True
    return frac_root_floor(ratio, depth) - 1, False


def check_balance(g: Graph, block_ids, k: int, eps) -> BalanceReport:
    """Per-block weights, L_max and the balance verdict for a k-way assignment."""
    block_ids = np.asarray(block_ids, dtype=np.int64)
    if len(block_ids) != g.n:
        raise ValueError("assignment length must equal vertex count")
    if len(block_ids) and (block_ids.min() < 0 or block_ids.max() >= k):
        raise ValueError("block id out of range")
    weights = np.bincount(block_ids, weights=g.vertex_weights, minlength=k).astype(
        np.int64
    )
    total = total_weight(g)
    l_max = compute_l_max(total, k, eps)
    max_w = int(weights.max()) if k else 0
    imbalance = Fraction(max_w * k, total) - 1 if total > 0 else Fraction(0)
    return BalanceReport(
        block_weights=weights,
        l_max=l_max,
        max_imbalance=imbalance,
        is_balanced=bool((weights <= l_max).all()),
    )
