"""Command-line surface: map, eval, bench, perfprofile, oracle."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import (
    QualityTable,
    RunRecord,
    aggregate_records,
    performance_profile,
    plot_profile,
    run_campaign,
    write_aggregate_csv,
    write_profile_csv,
    write_records_csv,
)
from .graph import edge_cut, load_metis
from .multisection import map_hierarchical
from .oracle import brute_force_best_mapping
from .partitioner import PartitionConfig
from .topology import check_balance, comm_cost, parse_hierarchy

_STRATEGIES = ["naive", "layer", "queue", "nb-layer"]
_PRESETS = ["fast", "eco", "strong"]


def _load_graph(path: str):
    with open(path) as fh:
        return load_metis(fh)


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_map(args) -> int:
    h = parse_hierarchy(args.hierarchy, args.distance)
    g = _load_graph(args.graph)
    if g.n < h.k:
        raise ValueError(
            f"graph has {g.n} vertices but the hierarchy needs k={h.k} (n < k)"
        )
    cfg = PartitionConfig.from_preset(args.preset)
    mapping, stats = map_hierarchical(
        g, h, args.imbalance, args.threads, args.strategy.replace("-", "_"),
        cfg, args.seed,
    )
    lines = "\n".join(str(int(x)) for x in mapping.assignment) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    record = RunRecord(
        instance=args.graph.rsplit("/", 1)[-1],
        hierarchy=args.hierarchy,
        distance=args.distance,
        eps=args.imbalance,
        strategy=stats.strategy,
        preset=args.preset,
        threads=args.threads,
        seed=args.seed,
        J=stats.comm_cost,
        edge_cut=stats.edge_cut,
        max_imbalance=float(stats.balance.max_imbalance),
        wall_time_ms=stats.wall_time_ms,
    )
    payload = json.dumps(record.as_dict())
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


def load_mapping_file(path: str, n: int, k: int) -> np.ndarray:
    with open(path) as fh:
        values = [int(line.strip()) for line in fh if line.strip()]
    if len(values) != n:
        raise ValueError(f"mapping has {len(values)} lines but the graph has {n} vertices")
    arr = np.asarray(values, dtype=np.int64)
    if len(arr) and (arr.min() < 0 or arr.max() >= k):
        raise ValueError(f"PE id out of range [0, {k})")
    return arr


def cmd_eval(args) -> int:
    h = parse_hierarchy(args.hierarchy, args.distance)
    g = _load_graph(args.graph)
    pe = load_mapping_file(args.mapping, g.n, h.k)
    j = comm_cost(g, h, pe)
    report = check_balance(g, pe, h.k, args.imbalance)
    payload = {
        "J": j,
        "J_half": j // 2,
        "edge_cut": edge_cut(g, pe),
        "block_weights": [int(w) for w in report.block_weights],
        "l_max": report.l_max,
        "max_imbalance": float(report.max_imbalance),
        "balanced": report.is_balanced,
    }
    print(json.dumps(payload))
    return 0


def cmd_bench(args) -> int:
    with open(args.instances) as fh:
        paths = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    if len(args.hierarchy) != len(args.distance):
        raise ValueError("each --hierarchy needs a matching --distance")
    hierarchies = list(zip(args.hierarchy, args.distance))
    strategies = [s.replace("-", "_") for s in args.strategies.split(",") if s]
    records = run_campaign(
        paths,
        hierarchies,
        args.imbalance,
        _int_list(args.seeds),
        strategies,
        [p for p in args.presets.split(",") if p],
        _int_list(args.threads),
        jobs=args.jobs,
    )
    write_records_csv(records, args.output)
    if args.aggregate:
        baseline = None
        if args.baseline:
            strat, preset, threads = args.baseline.split(":")
            baseline = (strat.replace("-", "_"), preset, int(threads))
        rows = aggregate_records(records, baseline)
        write_aggregate_csv(rows, args.aggregate)
    failures = sum(1 for r in records if r.error)
    print(f"wrote {len(records)} records to {args.output} ({failures} failed)")
    return 0


def cmd_perfprofile(args) -> int:
    table = QualityTable.from_csv(args.table)
    taus = [float(t) for t in args.taus.split(",")] if args.taus else None
    points = performance_profile(table, taus)
    write_profile_csv(points, args.output)
    if args.plot:
        plot_profile(points, args.plot)
    print(f"wrote {len(points)} profile points to {args.output}")
    return 0


def cmd_oracle(args) -> int:
    h = parse_hierarchy(args.hierarchy, args.distance)
    g = _load_graph(args.graph)
    best, witness = brute_force_best_mapping(g, h, args.imbalance)
    print(json.dumps({"optimal_J": best, "mapping": [int(x) for x in witness]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiermap",
        description="Map task graphs onto hierarchical hardware topologies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="compute a mapping and write it out")
    p_map.add_argument("--graph", required=True)
    p_map.add_argument("--hierarchy", required=True)
    p_map.add_argument("--distance", required=True)
    p_map.add_argument("--imbalance", type=float, default=0.03)
    p_map.add_argument("--threads", type=int, default=1)
    p_map.add_argument("--strategy", choices=_STRATEGIES, default="nb-layer")
    p_map.add_argument("--preset", choices=_PRESETS, default="eco")
    p_map.add_argument("--seed", type=int, default=1)
    p_map.add_argument("--output")
    p_map.add_argument("--stats")
    p_map.set_defaults(func=cmd_map)

    p_eval = sub.add_parser("eval", help="audit an existing mapping file")
    p_eval.add_argument("--graph", required=True)
    p_eval.add_argument("--hierarchy", required=True)
    p_eval.add_argument("--distance", required=True)
    p_eval.add_argument("--mapping", required=True)
    p_eval.add_argument("--imbalance", type=float, default=0.03)
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="run a seeded benchmark campaign")
    p_bench.add_argument("--instances", required=True, help="file with one graph path per line")
    p_bench.add_argument("--hierarchy", action="append", required=True)
    p_bench.add_argument("--distance", action="append", required=True)
    p_bench.add_argument("--imbalance", type=float, default=0.03)
    p_bench.add_argument("--seeds", default="1,2,3")
    p_bench.add_argument("--strategies", default="nb-layer")
    p_bench.add_argument("--presets", default="eco")
    p_bench.add_argument("--threads", default="1")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--output", required=True)
    p_bench.add_argument("--aggregate")
    p_bench.add_argument("--baseline", help="strategy:preset:threads")
    p_bench.set_defaults(func=cmd_bench)

    p_prof = sub.add_parser("perfprofile", help="compute performance profiles")
    p_prof.add_argument("--table", required=True, help="CSV algorithm,instance,quality")
    p_prof.add_argument("--output", required=True)
    p_prof.add_argument("--taus")
    p_prof.add_argument("--plot")
    p_prof.set_defaults(func=cmd_perfprofile)

    p_oracle = sub.add_parser("oracle", help="exhaustive optimum for tiny instances")
    p_oracle.add_argument("--graph", required=True)
    p_oracle.add_argument("--hierarchy", required=True)
    p_oracle.add_argument("--distance", required=True)
    p_oracle.add_argument("--imbalance", type=float, default=0.03)
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
