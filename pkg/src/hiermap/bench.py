"""Benchmark records, aggregation and performance profiles."""

from __future__ import annotations

import csv
import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

from .graph import load_metis
from .multisection import map_hierarchical
from .partitioner import PartitionConfig
from .topology import parse_hierarchy

RUN_COLUMNS = [
    "instance", "hierarchy", "distance", "eps", "strategy", "preset",
    "threads", "seed", "J", "edge_cut", "max_imbalance", "wall_time_ms", "error",
]

AGG_COLUMNS = [
    "instance", "hierarchy", "strategy", "preset", "threads",
    "geomean_time_ms", "mean_J", "speedup",
]


@dataclass
class RunRecord:
    instance: str
    hierarchy: str
    distance: str
    eps: float
    strategy: str
    preset: str
    threads: int
    seed: int
    J: int | None = None
    edge_cut: int | None = None
    max_imbalance: float | None = None
    wall_time_ms: float | None = None
    error: str = ""

    def as_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append("" if v is None else str(v))
        return out

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def geometric_mean(values) -> float:
    values = list(values)
    if not values:
        raise ValueError("geometric mean of nothing")
    if any(v <= 0 for v in values):
        raise ValueError("geometric mean needs positive values")
    return math.exp(sum(math.log(v) for v in values) / len(values))


def run_one(
    graph, instance_name, h_text, d_text, eps, strategy, preset, threads, seed
) -> RunRecord:
    rec = RunRecord(
        instance=instance_name, hierarchy=h_text, distance=d_text, eps=eps,
        strategy=strategy, preset=preset, threads=threads, seed=seed,
    )
    try:
        h = parse_hierarchy(h_text, d_text)
        cfg = PartitionConfig.from_preset(preset)
        if graph.n < h.k:
            raise ValueError(f"graph has {graph.n} vertices but hierarchy has k={h.k}")
        _, stats = map_hierarchical(graph, h, eps, threads, strategy, cfg, seed)
        rec.J = stats.comm_cost
        rec.edge_cut = stats.edge_cut
        rec.max_imbalance = float(stats.balance.max_imbalance)
        rec.wall_time_ms = stats.wall_time_ms
    except Exception as exc:  # record the failure, keep the campaign going
        rec.error = str(exc)
    return rec


def run_campaign(
    instance_paths: list[str],
    hierarchies: list[tuple[str, str]],
    eps: float,
    seeds: list[int],
    strategies: list[str],
    presets: list[str],
    threads_list: list[int],
    jobs: int = 1,
) -> list[RunRecord]:
    """One record per (instance, hierarchy, strategy, preset, threads, seed)."""
    graphs = {}
    for path in instance_paths:
        with open(path) as fh:
            graphs[path] = load_metis(fh)

    work = []
    for path in instance_paths:
        name = path.rsplit("/", 1)[-1]
        for h_text, d_text in hierarchies:
            for strategy in strategies:
                for preset in presets:
                    for threads in threads_list:
                        for seed in seeds:
                            work.append(
                                (graphs[path], name, h_text, d_text, eps,
                                 strategy, preset, threads, seed)
                            )
    if jobs <= 1:
        return [run_one(*args) for args in work]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda args: run_one(*args), work))


def write_records_csv(records: list[RunRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for rec in records:
            writer.writerow(rec.as_row())


def aggregate_records(
    records: list[RunRecord], baseline: tuple[str, str, int] | None = None
) -> list[dict]:
    """Per-configuration geometric-mean time and arithmetic-mean J across seeds.

    With a baseline (strategy, preset, threads) the speedup column holds
    baseline_time / time for the matching instance and hierarchy.
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.error:
            continue
        key = (rec.instance, rec.hierarchy, rec.strategy, rec.preset, rec.threads)
        groups.setdefault(key, []).append(rec)

    rows = []
    for key in sorted(groups, key=lambda t: tuple(str(x) for x in t)):
        recs = groups[key]
        rows.append({
            "instance": key[0],
            "hierarchy": key[1],
            "strategy": key[2],
            "preset": key[3],
            "threads": key[4],
            "geomean_time_ms": geometric_mean(r.wall_time_ms for r in recs),
            "mean_J": sum(r.J for r in recs) / len(recs),
            "speedup": "",
        })
    if baseline is not None:
        base_time = {
            (r["instance"], r["hierarchy"]): r["geomean_time_ms"]
            for r in rows
            if (r["strategy"], r["preset"], r["threads"]) == baseline
        }
        for r in rows:
            base = base_time.get((r["instance"], r["hierarchy"]))
            if base is not None:
                r["speedup"] = base / r["geomean_time_ms"]
    return rows


def write_aggregate_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGG_COLUMNS)
        for r in rows:
            writer.writerow([str(r[c]) for c in AGG_COLUMNS])


@dataclass
class QualityTable:
    """(algorithm, instance, quality) triples; must be dense and unique."""

    rows: list[tuple[str, str, float]]

    def __post_init__(self):
        seen = set()
        for alg, inst, q in self.rows:
            if (alg, inst) in seen:
                raise ValueError(f"duplicate entry for ({alg}, {inst})")
            seen.add((alg, inst))
            if q < 0:
                raise ValueError("qualities must be non-negative")
        algs = self.algorithms()
        insts = self.instances()
        if len(seen) != len(algs) * len(insts):
            raise ValueError("sparse table: every algorithm must cover every instance")

    def algorithms(self) -> list[str]:
        return sorted({alg for alg, _, _ in self.rows})

    def instances(self) -> list[str]:
        return sorted({inst for _, inst, _ in self.rows})

    def quality(self, alg: str, inst: str) -> float:
        for a, i, q in self.rows:
            if a == alg and i == inst:
                return q
        raise KeyError((alg, inst))

    @classmethod
    def from_csv(cls, path: str) -> "QualityTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip().lower() for h in header[:3]] != ["algorithm", "instance", "quality"]:
                raise ValueError("expected header algorithm,instance,quality")
            for line in reader:
                if not line:
                    continue
                rows.append((line[0], line[1], float(line[2])))
        return cls(rows)


def performance_profile(
    table: QualityTable, taus: list[float] | None = None
) -> list[tuple[str, float, float]]:
    """Fraction of instances each algorithm solves within factor tau of the best.

    Best(I) is the minimum quality over algorithms (smaller is better here).
    Instances whose best quality is 0 are excluded with a warning since the
    tau ratio is undefined for them.
    """
    algs = table.algorithms()
    insts = table.instances()
    best = {}
    for inst in insts:
        best[inst] = min(table.quality(alg, inst) for alg in algs)
    usable = [inst for inst in insts if best[inst] > 0]
    dropped = [inst for inst in insts if best[inst] == 0]
    if dropped:
        warnings.warn(
            f"excluding {len(dropped)} zero-quality instance(s) from the profile: "
            + ", ".join(dropped)
        )
    if not usable:
        raise ValueError("no instance with positive best quality")

    ratios = {
        alg: [table.quality(alg, inst) / best[inst] for inst in usable] for alg in algs
    }
    if taus is None:
        taus = sorted({1.0} | {r for rs in ratios.values() for r in rs})
    points = []
    for alg in algs:
        for tau in taus:
            frac = sum(1 for r in ratios[alg] if r <= tau) / len(usable)
            points.append((alg, float(tau), frac))
    return points


def write_profile_csv(points: list[tuple[str, float, float]], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "tau", "fraction"])
        for alg, tau, frac in points:
            writer.writerow([alg, str(tau), str(frac)])


def plot_profile(points: list[tuple[str, float, float]], path: str) -> None:
    """Step plot of the profile curves to a vector graphics file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_alg: dict[str, list[tuple[float, float]]] = {}
    for alg, tau, frac in points:
        by_alg.setdefault(alg, []).append((tau, frac))
    fig, ax = plt.subplots(figsize=(5, 4))
    for alg, pts in sorted(by_alg.items()):
        pts = sorted(pts)
        ax.step([t for t, _ in pts], [f for _, f in pts], where="post", label=alg)
    ax.set_xlabel("tau")
    ax.set_ylabel("fraction of instances")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
