"""Experiment harness: sweeps, normalization and geometric-mean aggregation."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

import numpy as np

from .coloring import FirstFit, Ordering, greedy_color
from .graph import Graph
from .metrics import CSV_FIELDS, TRAJECTORY_FIELDS, RunMetrics
from .partition import Partition, block_partition
from .pipeline import RunConfig, run_pipeline

# metrics reported as means over seeds and normalized by the baseline
NORMALIZED = ("num_colors", "ticks")


@dataclass(frozen=True)
class NormalizedRecord:
    graph: str
    config: str
    metric: str
    raw: float
    baseline: float
    normalized: float


def normalize(records: Iterable[tuple[str, str, str, float]],
              baselines: Mapping[tuple[str, str], float]) -> list[NormalizedRecord]:
    """Divide each ``(graph, config, metric, raw)`` by ``baselines[graph, metric]``."""
    out = []
    for graph, config, metric, raw in records:
        try:
            base = baselines[graph, metric]
        except KeyError:
            raise KeyError(f"no baseline for {metric} on {graph}") from None
        if base <= 0:
            raise ValueError(f"baseline {metric} on {graph} is {base}, must be > 0")
        out.append(NormalizedRecord(graph, config, metric, raw, base, raw / base))
    return out


def geo_mean(values: Iterable[float]) -> float:
    vals = np.asarray(list(values), dtype=float)
    if len(vals) == 0:
        raise ValueError("geometric mean of nothing")
    if np.any(vals <= 0):
        raise ValueError("geometric mean needs positive values")
    return float(np.exp(np.mean(np.log(vals))))


@dataclass
class SweepRow:
    graph: str
    config: str
    seeds: list[int]
    per_seed: list[RunMetrics] = field(default_factory=list)
    mean: dict[str, float] = field(default_factory=dict)
    normalized: dict[str, float] = field(default_factory=dict)
    error: str | None = None


def baseline_metrics(g: Graph, cfg: RunConfig) -> dict[str, float]:
    """Natural-order first-fit coloring on one processor."""
    base = cfg.replace(ordering=Ordering.NATURAL, selection=FirstFit(), recolor_iters=0)
    _, m = run_pipeline(g, block_partition(g, 1), base)
    assert m.num_colors == int(greedy_color(g).max())
    return {"num_colors": m.num_colors, "ticks": m.ticks}


def sweep(graphs: Mapping[str, tuple[Graph, Partition]], configs: Mapping[str, RunConfig],
          seeds: Iterable[int] = (0,)) -> list[SweepRow]:
    """Run every (graph, config) cell over all seeds; one row per cell.

    Cells average their metrics over seeds before normalizing by the
    graph's baseline. A failing cell yields a row carrying the error.
    """
    seeds = list(seeds)
    if not graphs or not configs or not seeds:
        raise ValueError("empty sweep grid")
    rows = []
    for gname, (g, part) in graphs.items():
        base = None
        for cname, cfg in configs.items():
            row = SweepRow(gname, cname, seeds)
            try:
                if base is None:
                    base = baseline_metrics(g, cfg)
                for s in seeds:
                    _, m = run_pipeline(g, part, cfg.replace(seed=s))
                    row.per_seed.append(m)
                row.mean = {k: float(np.mean([m.row()[k] for m in row.per_seed])) for k in CSV_FIELDS[3:]}
                recs = normalize(((gname, cname, k, row.mean[k]) for k in NORMALIZED),
                                 {(gname, k): v for k, v in base.items()})
                row.normalized = {r.metric: r.normalized for r in recs}
            except Exception as exc:  # annotate, keep sweeping
                row.error = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows


def aggregate(rows: Iterable[SweepRow], metric: str = "num_colors") -> dict[str, float]:
    """Geometric mean over graphs of each config's normalized ``metric``."""
    by_cfg: dict[str, list[float]] = {}
    for r in rows:
        if r.error is None:
            by_cfg.setdefault(r.config, []).append(r.normalized[metric])
    return {c: geo_mean(v) for c, v in by_cfg.items()}


def _seed_lines(rows: Iterable[SweepRow]):
    for r in rows:
        for s, m in zip(r.seeds, r.per_seed):
            yield {"graph": r.graph, "config": r.config, "seed": s, **m.row()}


def write_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
    w = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(_seed_lines(rows))


def write_json(rows: Iterable[SweepRow], stream: TextIO) -> None:
    json.dump(list(_seed_lines(rows)), stream, indent=1)
    stream.write("\n")


def write_trajectories(rows: Iterable[SweepRow], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TRAJECTORY_FIELDS)
    for r in rows:
        for s, m in zip(r.seeds, r.per_seed):
            for i, k in enumerate(m.trajectory):
                w.writerow([r.graph, r.config, s, i, k])


def summary_table(rows: Iterable[SweepRow]) -> str:
    lines = [f"{'graph':<16}{'config':<14}{'colors':>8}{'norm':>8}{'conflicts':>11}{'msgs':>9}"]
    for r in rows:
        if r.error:
            lines.append(f"{r.graph:<16}{r.config:<14}  error: {r.error}")
            continue
        lines.append(f"{r.graph:<16}{r.config:<14}{r.mean['num_colors']:>8.2f}"
                     f"{r.normalized['num_colors']:>8.3f}{r.mean['conflicts']:>11.1f}{r.mean['msgs']:>9.0f}")
    return "\n".join(lines)


__all__ = ["NormalizedRecord", "SweepRow", "normalize", "geo_mean", "sweep", "aggregate",
           "write_csv", "write_json", "write_trajectories", "summary_table"]
