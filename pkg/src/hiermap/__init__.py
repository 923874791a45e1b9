"""Hierarchical multisection mapping of task graphs onto tree topologies."""

from .graph import (
    Graph,
    GraphFormatError,
    SubgraphExtraction,
    edge_cut,
    extract_subgraph,
    from_edges,
    load_metis,
    metis_to_string,
    save_metis,
    total_weight,
)
from .multisection import (
    PartitionTask,
    RunStats,
    SchedulerProbe,
    StrategyKind,
    collect_leaf_tasks,
    distribute_threads,
    map_hierarchical,
)
from .oracle import brute_force_best_mapping
from .partitioner import (
    PartitionConfig,
    PartitionResult,
    coarsen_once,
    fm_refine,
    initial_bipartition,
    partition,
    recursive_split,
)
from .topology import (
    BalanceReport,
    Hierarchy,
    Mapping,
    adaptive_epsilon,
    check_balance,
    comm_cost,
    compute_l_max,
    parse_hierarchy,
    pe_distance,
)

__all__ = [
    "BalanceReport",
    "Graph",
    "GraphFormatError",
    "Hierarchy",
    "Mapping",
    "PartitionConfig",
    "PartitionResult",
    "PartitionTask",
    "RunStats",
    "SchedulerProbe",
    "StrategyKind",
    "SubgraphExtraction",
    "adaptive_epsilon",
    "brute_force_best_mapping",
    "check_balance",
    "coarsen_once",
    "collect_leaf_tasks",
    "comm_cost",
    "compute_l_max",
    "distribute_threads",
    "edge_cut",
    "extract_subgraph",
    "fm_refine",
    "from_edges",
    "initial_bipartition",
    "load_metis",
    "map_hierarchical",
    "metis_to_string",
    "parse_hierarchy",
    "partition",
    "pe_distance",
    "recursive_split",
    "save_metis",
    "total_weight",
]
