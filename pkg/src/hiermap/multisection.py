"""Hierarchical multisection driver.

Partitions a communication graph level by level along the hardware
hierarchy (a_l-way first, then a_{l-1}-way per block, ...) so that the
final block-to-PE assignment is the identity on depth-first contiguous PE
ids.  Four thread-distribution strategies decide how a budget of p threads
is spread over the independent partitioning tasks:

* naive:    all p threads on one task at a time, depth first.
* layer:    one hierarchy level at a time; min(p, |S|) workers claim tasks
            through a shared read-and-increment cursor, budgets fixed by
            the task index; a barrier separates levels.
* queue:    a master thread pops the largest graph from a size-ordered
            queue whenever threads are idle and gives it ceil(p_A / |Q|)
            of them.
* nb_layer: groups of threads drain a sibling set through a shared cursor,
            absorb globally idle threads before each partition call, and
            split into child groups locally, so a slow region only stalls
            its own subtree.

At p == 1 all four reduce to the same sequential recursion: seeds hang off
hierarchy positions, not execution order, so the mappings are bit-identical.
"""

from __future__ import annotations

import enum
import heapq
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._util import split_seed, to_fraction
from .graph import Graph, edge_cut, extract_subgraph, total_weight
from .partitioner import PartitionConfig, partition
from .topology import (
    BalanceReport,
    Hierarchy,
    Mapping,
    adaptive_epsilon,
    check_balance,
    comm_cost,
)


class StrategyKind(str, enum.Enum):
    NAIVE = "naive"
    LAYER = "layer"
    QUEUE = "queue"
    NB_LAYER = "nb_layer"

    @classmethod
    def parse(cls, text: str) -> "StrategyKind":
        return cls(text.replace("-", "_").lower())


@dataclass
class PartitionTask:
    """A subgraph waiting to be partitioned at some depth of the hierarchy.

    depth counts from l at the root down to 0 at single-PE leaves;
    block_offset is the first PE id owned by this subtree.
    """

    graph: Graph
    local_to_global: np.ndarray
    depth: int
    block_offset: int
    seed: int
    budget: int = 1


@dataclass
class RunStats:
    strategy: str
    threads: int
    seed: int
    wall_time_ms: float = 0.0
    partition_calls_by_depth: dict = field(default_factory=dict)
    fallback_assignments: int = 0
    balance_risk_flags: int = 0
    comm_cost: int = 0
    edge_cut: int = 0
    balance: BalanceReport | None = None


class SchedulerProbe:
    """Instrumentation hooks: thread accounting and logical race detection.

    Counts threads inside partition attempts, verifies idle-pool
    conservation and cursor-claim uniqueness, and collects any invariant
    violation as a string so tests can assert the run was clean.
    """

    def __init__(self, p: int):
        self.p = p
        self._lock = threading.Lock()
        self.violations: list[str] = []
        self.calls: list[tuple[int, int, int]] = []  # (depth, budget, n)
        self.cursor_counts: Counter = Counter()
        self.max_concurrent_threads = 0
        self.max_concurrent_calls = 0
        self.queue_final_state: tuple[int, int] | None = None
        self.pool_final: int | None = None
        self._active_threads = 0
        self._active_calls = 0
        self._budget_in_flight = 0
        self._pool = 0

    def attempt_enter(self):
        with self._lock:
            self._active_threads += 1
            if self._active_threads > self.max_concurrent_threads:
                self.max_concurrent_threads = self._active_threads
            if self._active_threads > self.p:
                self.violations.append(
                    f"{self._active_threads} threads inside partition calls (p={self.p})"
                )

    def attempt_exit(self):
        with self._lock:
            self._active_threads -= 1

    def call_enter(self, depth: int, budget: int, n: int):
        with self._lock:
            self.calls.append((depth, budget, n))
            self._active_calls += 1
            if self._active_calls > self.max_concurrent_calls:
                self.max_concurrent_calls = self._active_calls

    def call_exit(self):
        with self._lock:
            self._active_calls -= 1

    def cursor_tick(self, tag):
        with self._lock:
            self.cursor_counts[tag] += 1

    def slot_fill(self, was_empty: bool, where: str):
        if not was_empty:
            with self._lock:
                self.violations.append(f"double write to result slot in {where}")

    # idle-pool conservation: sum of live group budgets plus the pool must
    # always equal p; transfers report under one lock so snapshots are exact
    def pool_start(self, initial_budget: int):
        with self._lock:
            self._budget_in_flight = initial_budget
            self._pool = 0

    def pool_transfer(self, budget_delta: int, pool_after: int):
        with self._lock:
            self._budget_in_flight += budget_delta
            self._pool = pool_after
            if pool_after < 0 or pool_after > self.p:
                self.violations.append(f"idle pool out of range: {pool_after}")
            if self._budget_in_flight + pool_after != self.p:
                self.violations.append(
                    f"pool conservation broken: budgets={self._budget_in_flight} pool={pool_after}"
                )

    def pool_finish(self, final_pool: int):
        with self._lock:
            self.pool_final = final_pool
            if final_pool != self.p:
                self.violations.append(f"idle pool ended at {final_pool}, expected {self.p}")

    def queue_observe(self, p_a: int, qlen: int):
        with self._lock:
            if p_a < 0 or p_a > self.p:
                self.violations.append(f"available-thread count out of range: {p_a}")

    def queue_finish(self, p_a: int, qlen: int):
        with self._lock:
            self.queue_final_state = (p_a, qlen)
            if p_a != self.p or qlen != 0:
                self.violations.append(
                    f"queue strategy ended with p_A={p_a}, |Q|={qlen}"
                )


class _AtomicIndex:
    """Linearizable read-and-increment cursor."""

    def __init__(self, probe: SchedulerProbe | None = None, tag=None):
        self._value = 0
        self._lock = threading.Lock()
        self._probe = probe
        self._tag = tag

    def next(self) -> int:
        with self._lock:
            v = self._value
            self._value += 1
        if self._probe is not None and self._tag is not None:
            self._probe.cursor_tick(self._tag)
        return v


class _IdlePool:
    """Shared count of currently idle threads (linearizable add / swap-to-zero)."""

    def __init__(self, probe: SchedulerProbe | None = None):
        self._value = 0
        self._lock = threading.Lock()
        self._probe = probe

    def take_all(self) -> int:
        with self._lock:
            v = self._value
            self._value = 0
            if self._probe is not None and v:
                self._probe.pool_transfer(+v, 0)
        return v

    def deposit(self, amount: int):
        with self._lock:
            self._value += amount
            if self._probe is not None:
                self._probe.pool_transfer(-amount, self._value)

    @property
    def value(self) -> int:
        with self._lock:
            return self._value


def distribute_threads(p: int, m: int, j: int) -> int:
    """Threads granted to the j-th of m sibling graphs (1-based j).

    With p >= m every graph gets floor(p/m) and the first p - floor(p/m)*m
    graphs one extra, so budgets sum to p and differ by at most one; with
    p < m every graph gets exactly one thread.
    """
    if p < 1 or m < 1:
        raise ValueError("need p >= 1 and m >= 1")
    if not 1 <= j <= m:
        raise ValueError(f"graph index {j} out of range [1, {m}]")
    if p >= m:
        base = p // m
        return base + (1 if (j - 1) < p - base * m else 0)
    return 1


class _MapContext:
    """Shared immutable inputs plus thread-safe counters for one mapping run."""

    def __init__(self, g, h, eps, cfg, probe):
        self.graph = g
        self.hierarchy = h
        self.eps = to_fraction(eps)
        self.cfg = cfg
        self.probe = probe
        self.total = total_weight(g)
        self.k = h.k
        self.prefix = h.prefix_products
        self._lock = threading.Lock()
        self.calls_by_depth: Counter = Counter()
        self.fallbacks = 0
        self.risk_flags = 0

    def count_call(self, depth: int):
        with self._lock:
            self.calls_by_depth[depth] += 1

    def count_fallback(self):
        with self._lock:
            self.fallbacks += 1

    def count_risk(self):
        with self._lock:
            self.risk_flags += 1


_EMPTY_GRAPH = Graph(np.zeros(1, dtype=np.int64), [], [], [])


def _fallback_blocks(g: Graph, a: int) -> np.ndarray:
    """Assignment for subgraphs the partitioner rejects (n < a or weight 0).

    Heaviest vertices spread over distinct blocks first; the remainder is
    dealt round-robin so counts stay even.
    """
    order = np.lexsort((np.arange(g.n), -g.vertex_weights))
    blocks = np.empty(g.n, dtype=np.int64)
    blocks[order] = np.arange(g.n) % a
    return blocks


def process_task(ctx: _MapContext, task: PartitionTask, budget: int) -> list[PartitionTask]:
    """Partition one task into its a_d blocks and build the child tasks."""
    d = task.depth
    a = ctx.hierarchy.arities[d - 1]
    sub = task.graph
    child_size = ctx.prefix[d - 2] if d >= 2 else 1

    if sub.n == 0:
        blocks = None
    else:
        w = total_weight(sub)
        if w == 0 or sub.n < a:
            blocks = _fallback_blocks(sub, a)
            ctx.count_fallback()
        else:
            eps_p, clamped = adaptive_epsilon(
                ctx.eps, ctx.k, ctx.total, ctx.prefix[d - 1], w, d
            )
            if clamped:
                ctx.count_risk()
            ctx.count_call(d)
            if ctx.probe is not None:
                ctx.probe.call_enter(d, budget, sub.n)
            try:
                result = partition(
                    sub, a, eps_p, budget, ctx.cfg, task.seed, probe=ctx.probe
                )
            finally:
                if ctx.probe is not None:
                    ctx.probe.call_exit()
            blocks = result.block_ids

    children = []
    for b in range(a):
        if blocks is not None and (blocks == b).any():
            ext = extract_subgraph(sub, blocks, b)
            child_graph = ext.subgraph
            child_l2g = task.local_to_global[ext.local_to_global]
        else:
            child_graph = _EMPTY_GRAPH
            child_l2g = np.empty(0, dtype=np.int64)
        children.append(
            PartitionTask(
                graph=child_graph,
                local_to_global=child_l2g,
                depth=d - 1,
                block_offset=task.block_offset + b * child_size,
                seed=split_seed(task.seed, b + 1),
            )
        )
    return children


def run_naive(ctx: _MapContext, root: PartitionTask, p: int) -> list[PartitionTask]:
    """Depth-first, strictly sequential; every partition call gets all p threads."""
    leaves = []
    stack = [root]
    while stack:
        task = stack.pop()
        if task.depth == 0:
            leaves.append(task)
            continue
        stack.extend(reversed(process_task(ctx, task, p)))
    return leaves


def run_layer(ctx: _MapContext, root: PartitionTask, p: int) -> list[PartitionTask]:
    """Level-synchronous: claim tasks via a shared cursor, barrier per level."""
    level = [root]
    depth = root.depth
    li = 0
    while depth > 0:
        m = len(level)
        a = ctx.hierarchy.arities[depth - 1]
        nxt: list = [None] * (m * a)
        cursor = _AtomicIndex(ctx.probe, tag=("layer", li))

        def worker():
            while True:
                j = cursor.next()
                if j >= m:
                    break
                kids = process_task(ctx, level[j], distribute_threads(p, m, j + 1))
                base = j * a
                for i, kid in enumerate(kids):
                    if ctx.probe is not None:
                        ctx.probe.slot_fill(nxt[base + i] is None, "layer")
                    nxt[base + i] = kid

        launch = min(p, m)
        if launch <= 1:
            worker()
        else:
            threads = [threading.Thread(target=worker) for _ in range(launch)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        level = nxt
        depth -= 1
        li += 1
    return level


def run_queue(
    ctx: _MapContext, root: PartitionTask, p: int, size_metric: str = "vertices"
) -> list[PartitionTask]:
    """Master thread feeds a size-ordered queue of pending tasks.

    The master pops the largest graph whenever both a graph and idle
    threads exist, granting it ceil(p_A / |Q|) threads, and spawns one
    task at a time; finished tasks push children (or leaves into the
    solution set) and return their threads under the same lock.
    """
    if size_metric not in ("vertices", "edges"):
        raise ValueError("size_metric must be 'vertices' or 'edges'")

    def size_of(t: PartitionTask) -> int:
        return t.graph.n if size_metric == "vertices" else t.graph.num_edges

    cond = threading.Condition()
    heap: list = []
    counter = 0  # insertion order breaks ties between equal-size graphs
    state = {"p_a": p}
    solution: list[PartitionTask] = []
    workers: list[threading.Thread] = []

    def push(task: PartitionTask):
        nonlocal counter
        heapq.heappush(heap, (-size_of(task), counter, task))
        counter += 1

    def worker(task: PartitionTask, p_t: int):
        kids = process_task(ctx, task, p_t)
        with cond:
            if kids and kids[0].depth == 0:
                solution.extend(kids)
            else:
                for kid in kids:
                    push(kid)
            state["p_a"] += p_t
            if ctx.probe is not None:
                ctx.probe.queue_observe(state["p_a"], len(heap))
            cond.notify_all()

    with cond:
        push(root)
        while True:
            if not heap and state["p_a"] == p:
                break
            if heap and state["p_a"] > 0:
                p_t = -(-state["p_a"] // len(heap))
                _, _, task = heapq.heappop(heap)
                state["p_a"] -= p_t
                if ctx.probe is not None:
                    ctx.probe.queue_observe(state["p_a"], len(heap))
                th = threading.Thread(target=worker, args=(task, p_t))
                workers.append(th)
                th.start()
                continue
            cond.wait()
    for th in workers:
        th.join()
    if ctx.probe is not None:
        ctx.probe.queue_finish(state["p_a"], len(heap))
    return solution


def run_nb_layer(ctx: _MapContext, root: PartitionTask, p: int) -> list[PartitionTask]:
    """Layer processing with group-local result sets and an idle-thread pool.

    A group of threads drains its sibling set through a shared cursor,
    absorbing all globally idle threads before each partition call.  At the
    last level leaves go to the solution set and the group's threads enter
    the idle pool; otherwise the group splits into min(p, |R|) child groups.
    """
    pool = _IdlePool(ctx.probe)
    if ctx.probe is not None:
        ctx.probe.pool_start(p)
    solution: list[PartitionTask] = []
    sol_lock = threading.Lock()
    spawned: list[threading.Thread] = []
    reg_lock = threading.Lock()

    def group(tasks: list[PartitionTask], cursor: _AtomicIndex, budget: int):
        results: list[PartitionTask] = []
        j = cursor.next()
        while j < len(tasks):
            budget += pool.take_all()
            results.extend(process_task(ctx, tasks[j], budget))
            j = cursor.next()
        if not results:
            pool.deposit(budget)
            return
        if results[0].depth == 0:
            with sol_lock:
                solution.extend(results)
            pool.deposit(budget)
            return
        groups = min(budget, len(results))
        child_cursor = _AtomicIndex(ctx.probe, tag=("nb", id(results)))
        budgets = [distribute_threads(budget, groups, i + 1) for i in range(groups)]
        for i in range(1, groups):
            th = threading.Thread(target=group, args=(results, child_cursor, budgets[i]))
            with reg_lock:
                spawned.append(th)
            th.start()
        group(results, child_cursor, budgets[0])

    group([root], _AtomicIndex(ctx.probe, tag=("nb", "root")), p)
    i = 0
    while True:
        with reg_lock:
            if i >= len(spawned):
                break
            th = spawned[i]
        th.join()
        i += 1
    if ctx.probe is not None:
        ctx.probe.pool_finish(pool.value)
    return solution


_RUNNERS = {
    StrategyKind.NAIVE: run_naive,
    StrategyKind.LAYER: run_layer,
    StrategyKind.QUEUE: run_queue,
    StrategyKind.NB_LAYER: run_nb_layer,
}


def collect_leaf_tasks(
    g: Graph,
    h: Hierarchy,
    eps,
    p: int,
    strategy: StrategyKind | str,
    cfg: PartitionConfig,
    seed: int,
    probe: SchedulerProbe | None = None,
    queue_size_metric: str = "vertices",
) -> tuple[list[PartitionTask], _MapContext]:
    """Run one strategy and return the k leaf tasks (one per PE)."""
    if p < 1:
        raise ValueError("thread count must be >= 1")
    if total_weight(g) <= 0:
        raise ValueError("graph must have positive total weight")
    strategy = StrategyKind.parse(strategy) if isinstance(strategy, str) else strategy
    ctx = _MapContext(g, h, eps, cfg, probe)
    root = PartitionTask(
        graph=g,
        local_to_global=np.arange(g.n, dtype=np.int64),
        depth=h.levels,
        block_offset=0,
        seed=seed,
        budget=p,
    )
    if strategy is StrategyKind.QUEUE:
        leaves = run_queue(ctx, root, p, queue_size_metric)
    else:
        leaves = _RUNNERS[strategy](ctx, root, p)
    offsets = sorted(leaf.block_offset for leaf in leaves)
    if offsets != list(range(h.k)):
        raise RuntimeError("internal invariant violation: leaf PEs do not cover [0, k)")
    return leaves, ctx


def map_hierarchical(
    g: Graph,
    h: Hierarchy,
    eps,
    p: int,
    strategy: StrategyKind | str,
    cfg: PartitionConfig | None = None,
    seed: int = 1,
    probe: SchedulerProbe | None = None,
    queue_size_metric: str = "vertices",
) -> tuple[Mapping, RunStats]:
    """Map every task vertex to a PE of the hierarchy.

    A vertex landing in the leaf task with block offset o gets PE o; every
    partition call at depth d uses the adaptively rescaled imbalance so the
    final k-way assignment stays within the requested eps despite nested
    partitioning.
    """
    cfg = cfg or PartitionConfig.from_preset("eco")
    strategy = StrategyKind.parse(strategy) if isinstance(strategy, str) else strategy
    start = time.perf_counter()
    leaves, ctx = collect_leaf_tasks(
        g, h, eps, p, strategy, cfg, seed, probe, queue_size_metric
    )
    pe = np.full(g.n, -1, dtype=np.int64)
    for leaf in leaves:
        pe[leaf.local_to_global] = leaf.block_offset
    if g.n and pe.min() < 0:
        raise RuntimeError("internal invariant violation: unmapped vertices")
    mapping = Mapping(pe, h.k)
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    stats = RunStats(
        strategy=strategy.value,
        threads=p,
        seed=seed,
        wall_time_ms=elapsed_ms,
        partition_calls_by_depth=dict(ctx.calls_by_depth),
        fallback_assignments=ctx.fallbacks,
        balance_risk_flags=ctx.risk_flags,
        comm_cost=comm_cost(g, h, mapping),
        edge_cut=edge_cut(g, pe),
        balance=check_balance(g, pe, h.k, eps),
    )
    return mapping, stats
