"""Weighted graph storage, METIS file ingestion, subgraphs and edge-cut.

Graphs are stored in compressed adjacency (CSR) form with every undirected
edge {u, v} kept as the two directed entries u->v and v->u carrying the same
weight.  Vertex and edge weights are non-negative integers; all cut and cost
sums are exact integer arithmetic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed graph files or inconsistent adjacency data."""


class Graph:
    """Immutable undirected graph with integer vertex and edge weights."""

    __slots__ = ("n", "offsets", "targets", "vertex_weights", "edge_weights", "_sources")

    def __init__(self, offsets, targets, vertex_weights, edge_weights):
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.targets = np.ascontiguousarray(targets, dtype=np.int64)
        self.vertex_weights = np.ascontiguousarray(vertex_weights, dtype=np.int64)
        self.edge_weights = np.ascontiguousarray(edge_weights, dtype=np.int64)
        self.n = len(self.vertex_weights)
        self._sources = None
        self._validate()

    def _validate(self) -> None:
        if len(self.offsets) != self.n + 1:
            raise GraphFormatError("offsets length must be n + 1")
        if self.offsets[0] != 0 or np.any(np.diff(self.offsets) < 0):
            raise GraphFormatError("offsets must start at 0 and be non-decreasing")
        if self.offsets[-1] != len(self.targets):
            raise GraphFormatError("last offset must equal directed entry count")
        if len(self.edge_weights) != len(self.targets):
            raise GraphFormatError("one weight per directed entry required")
        if self.n and (np.any(self.vertex_weights < 0) or np.any(self.edge_weights < 0)):
            raise GraphFormatError("negative weight")
        if len(self.targets) and (self.targets.min() < 0 or self.targets.max() >= self.n):
            raise GraphFormatError("neighbor id out of range")

    @property
    def num_directed_entries(self) -> int:
        return len(self.targets)

    @property
    def num_edges(self) -> int:
        return len(self.targets) // 2

    def sources(self) -> np.ndarray:
        """Source vertex id of every directed entry (cached)."""
        if self._sources is None:
            self._sources = np.repeat(
                np.arange(self.n, dtype=np.int64), np.diff(self.offsets)
            )
        return self._sources

    def neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.vertex_weights, other.vertex_weights)
            and np.array_equal(self.edge_weights, other.edge_weights)
        )

    def __hash__(self):
        return id(self)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"

    @classmethod
    def _trusted(cls, offsets, targets, vertex_weights, edge_weights) -> "Graph":
        """Skip validation for arrays produced by the pipeline itself."""
        g = cls.__new__(cls)
        g.offsets = offsets
        g.targets = targets
        g.vertex_weights = vertex_weights
        g.edge_weights = edge_weights
        g.n = len(vertex_weights)
        g._sources = None
        return g


@dataclass
class SubgraphExtraction:
    """A vertex-induced subgraph plus the map from local to parent vertex ids."""

    subgraph: Graph
    local_to_global: np.ndarray


def from_edges(n: int, edges: Iterable[tuple], vertex_weights=None) -> Graph:
    """Build a Graph from undirected (u, v) or (u, v, w) tuples.

    Adjacency lists come out sorted by (source, target); self loops are
    rejected here because callers constructing graphs programmatically
    should never produce them.
    """
    edges = list(edges)
    us = np.empty(2 * len(edges), dtype=np.int64)
    vs = np.empty(2 * len(edges), dtype=np.int64)
    ws = np.empty(2 * len(edges), dtype=np.int64)
    for i, e in enumerate(edges):
        if len(e) == 2:
            u, v = e
            w = 1
        else:
            u, v, w = e
        if u == v:
            raise GraphFormatError(f"self loop on vertex {u}")
        us[2 * i], vs[2 * i], ws[2 * i] = u, v, w
        us[2 * i + 1], vs[2 * i + 1], ws[2 * i + 1] = v, u, w
    order = np.lexsort((vs, us))
    us, vs, ws = us[order], vs[order], ws[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, us + 1, 1)
    offsets = np.cumsum(offsets)
    if vertex_weights is None:
        vertex_weights = np.ones(n, dtype=np.int64)
    return Graph(offsets, vs, vertex_weights, ws)


def total_weight(g: Graph) -> int:
    """Sum of all vertex weights."""
    return int(g.vertex_weights.sum()) if g.n else 0


def _parse_header(tokens: list[str]) -> tuple[int, int, bool, bool]:
    if len(tokens) < 2 or len(tokens) > 4:
        raise GraphFormatError(f"malformed header: {' '.join(tokens)!r}")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise GraphFormatError(f"malformed header: {' '.join(tokens)!r}") from exc
    if n < 0 or m < 0:
        raise GraphFormatError("negative counts in header")
    fmt = tokens[2] if len(tokens) >= 3 else "0"
    if fmt not in ("0", "1", "10", "11", "00", "01"):
        raise GraphFormatError(f"unsupported format code {fmt!r}")
    has_ew = fmt.endswith("1")
    has_vw = len(fmt) == 2 and fmt[0] == "1"
    if len(tokens) == 4:
        try:
            ncon = int(tokens[3])
        except ValueError as exc:
            raise GraphFormatError("malformed ncon field") from exc
        if ncon != 1:
            raise GraphFormatError("only one vertex weight per vertex is supported")
    return n, m, has_vw, has_ew


def load_metis(source: TextIO | str) -> Graph:
    """Parse a METIS ASCII graph.

    Header is ``n m [fmt [ncon]]`` with fmt in {0, 1, 10, 11}: the low bit
    selects edge weights, the tens bit vertex weights.  Neighbor ids are
    1-indexed in the file and 0-indexed in the returned Graph.  Comment
    lines starting with '%' are skipped, missing weights default to 1,
    self loops are dropped, and asymmetric listings are rejected.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [ln for ln in source if ln.strip() and not ln.lstrip().startswith("%")]
    if not lines:
        raise GraphFormatError("empty input")
    n, m, has_vw, has_ew = _parse_header(lines[0].split())
    if len(lines) - 1 != n:
        raise GraphFormatError(
            f"expected {n} adjacency lines, found {len(lines) - 1}"
        )

    vwgt = np.ones(n, dtype=np.int64)
    srcs: list[int] = []
    tgts: list[int] = []
    wgts: list[int] = []
    entries = 0
    for v in range(n):
        tokens = lines[v + 1].split()
        try:
            fields = [int(t) for t in tokens]
        except ValueError as exc:
            raise GraphFormatError(f"non-integer token on line {v + 2}") from exc
        pos = 0
        if has_vw:
            if not fields:
                raise GraphFormatError(f"missing vertex weight on line {v + 2}")
            if fields[0] < 0:
                raise GraphFormatError(f"negative vertex weight on line {v + 2}")
            vwgt[v] = fields[0]
            pos = 1
        step = 2 if has_ew else 1
        if (len(fields) - pos) % step != 0:
            raise GraphFormatError(f"dangling token on line {v + 2}")
        for i in range(pos, len(fields), step):
            u = fields[i]
            w = fields[i + 1] if has_ew else 1
            if u < 1 or u > n:
                raise GraphFormatError(
                    f"neighbor id {u} out of range [1, {n}] on line {v + 2}"
                )
            if w < 0:
                raise GraphFormatError(f"negative edge weight on line {v + 2}")
            entries += 1
            if u - 1 == v:
                continue  # self loop: inert for cuts and cost, dropped
            srcs.append(v)
            tgts.append(u - 1)
            wgts.append(w)
    if entries != 2 * m:
        raise GraphFormatError(
            f"header declares {m} edges but lines list {entries} directed entries"
        )

    src = np.asarray(srcs, dtype=np.int64)
    tgt = np.asarray(tgts, dtype=np.int64)
    wgt = np.asarray(wgts, dtype=np.int64)
    _check_symmetry(n, src, tgt, wgt)

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, src + 1, 1)
    offsets = np.cumsum(offsets)
    return Graph(offsets, tgt, vwgt, wgt)


def _check_symmetry(n: int, src, tgt, wgt) -> None:
    """Every directed entry must have a reverse twin of equal weight."""
    if len(src) == 0:
        return
    fwd = np.lexsort((wgt, tgt, src))
    rev = np.lexsort((wgt, src, tgt))
    ok = (
        np.array_equal(src[fwd], tgt[rev])
        and np.array_equal(tgt[fwd], src[rev])
        and np.array_equal(wgt[fwd], wgt[rev])
    )
    if not ok:
        raise GraphFormatError("asymmetric adjacency: some edge is listed on one endpoint only or with unequal weights")


def save_metis(g: Graph, sink: TextIO) -> None:
    """Write a Graph in METIS ASCII form (format code 11, all weights explicit)."""
    sink.write(f"{g.n} {g.num_edges} 11\n")
    for v in range(g.n):
        lo, hi = g.offsets[v], g.offsets[v + 1]
        parts = [str(int(g.vertex_weights[v]))]
        for e in range(lo, hi):
            parts.append(str(int(g.targets[e]) + 1))
            parts.append(str(int(g.edge_weights[e])))
        sink.write(" ".join(parts) + "\n")


def metis_to_string(g: Graph) -> str:
    buf = io.StringIO()
    save_metis(g, buf)
    return buf.getvalue()


def extract_subgraph(g: Graph, block_ids, target: int) -> SubgraphExtraction:
    """Vertex-induced subgraph of one block.

    Keeps exactly the vertices with ``block_ids[v] == target`` (in ascending
    global id order) and the edges with both endpoints inside; cross-block
    edges are dropped.  Vertex weights carry over entry-wise.
    """
    block_ids = np.asarray(block_ids, dtype=np.int64)
    if len(block_ids) != g.n:
        raise ValueError("block_ids length must equal vertex count")
    mask = block_ids == target
    if not mask.any():
        raise ValueError(f"target block {target} is empty")
    local_to_global = np.flatnonzero(mask).astype(np.int64)
    global_to_local = np.full(g.n, -1, dtype=np.int64)
    global_to_local[local_to_global] = np.arange(len(local_to_global), dtype=np.int64)

    src = g.sources()
    keep = mask[src] & mask[g.targets]
    sub_src = global_to_local[src[keep]]
    sub_tgt = global_to_local[g.targets[keep]]
    sub_wgt = g.edge_weights[keep]
    # src is non-decreasing and the filter preserves order, so entries are
    # already grouped by local source id.
    offsets = np.zeros(len(local_to_global) + 1, dtype=np.int64)
    np.add.at(offsets, sub_src + 1, 1)
    offsets = np.cumsum(offsets)
    sub = Graph._trusted(
        offsets, sub_tgt, g.vertex_weights[local_to_global], sub_wgt
    )
    return SubgraphExtraction(sub, local_to_global)


def edge_cut(g: Graph, block_ids) -> int:
    """Total weight of undirected edges whose endpoints lie in different blocks."""
    block_ids = np.asarray(block_ids, dtype=np.int64)
    if len(block_ids) != g.n:
        raise ValueError("block_ids length must equal vertex count")
    if g.num_directed_entries == 0:
        return 0
    crossing = block_ids[g.sources()] != block_ids[g.targets]
    return int(g.edge_weights[crossing].sum()) // 2
