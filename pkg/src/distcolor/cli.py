"""Command-line entry point: ``distcolor generate|partition|color|recolor|sweep``."""
from __future__ import annotations

import argparse
import io
import os
import secrets
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bench
from .coloring import Ordering, check_validity, parse_selection
from .errors import InvalidColoringError, PartitionError
from .graph import (
    Graph,
    RmatParams,
    generate_rmat,
    load_edge_list,
    load_matrix_market,
    write_edge_list,
    write_matrix_market,
)
from .partition import Partition, block_partition, build_rank_views, load_partition_file, write_partition
from .pipeline import PRESETS, RunConfig, recolor_phase, run_pipeline
from .protocol import Mode

DEFAULT_SEED = 0
_ORDERINGS = {"natural": Ordering.NATURAL, "lf": Ordering.LARGEST_FIRST, "sl": Ordering.SMALLEST_LAST,
              "if": Ordering.INTERNAL_FIRST, "bf": Ordering.BOUNDARY_FIRST}


@dataclass
class CliConfig:
    """Everything one invocation needs: sources, algorithm settings, outputs."""

    command: str
    graphs: list[str]
    parts: str | None = None
    nparts: int | None = None
    run: RunConfig = field(default_factory=RunConfig)
    configs: dict[str, RunConfig] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: [DEFAULT_SEED])
    coloring_in: str | None = None
    out: str | None = None
    fmt: str = "mtx"
    metrics_csv: str | None = "-"
    metrics_json: str | None = None
    coloring_out: str | None = None
    trajectory_csv: str | None = None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text} must be >= 0")
    return v


def _selection(text: str):
    try:
        return parse_selection(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    if text == "random":
        s = secrets.randbits(32)
        print(f"seed: {s}", file=sys.stderr)
        return s
    return _nonneg(text)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distcolor", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def sources(p, many=False):
        grp = p.add_mutually_exclusive_group(required=True)
        act = "append" if many else "store"
        grp.add_argument("--graph", action=act, metavar="SRC",
                         help="MatrixMarket path (*.mtx), edge-list path, or rmat:scale,ef,a,b,c,d")
        grp.add_argument("--mtx", action=act, metavar="PATH")
        grp.add_argument("--edges", action=act, metavar="PATH")
        grp.add_argument("--rmat", action=act, metavar="SCALE,EF,A,B,C,D")

    def algo(p, many=False):
        p.add_argument("--parts", default="block:1", metavar="block:P|file:PATH")
        p.add_argument("--nparts", type=_positive, help="rank count for file partitions")
        p.add_argument("--preset", choices=sorted(PRESETS), action="append" if many else "store")
        p.add_argument("--ordering", choices=sorted(_ORDERINGS))
        p.add_argument("--selection", type=_selection, metavar="ff|sff[:E]|lu|randx:X")
        p.add_argument("--mode", choices=["sync", "async"])
        p.add_argument("--superstep", type=_positive)
        p.add_argument("--recolor-iters", type=_nonneg)
        p.add_argument("--perm", metavar="rv|ni|nd|rand|nd-rand:X|nd-rand-pow2")
        p.add_argument("--piggyback", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--recolor-flavor", choices=["sync", "async"])
        p.add_argument("--lag", type=_nonneg)
        p.add_argument("--backend", choices=["deterministic", "threaded"])
        p.add_argument("--metrics-csv", default="-", metavar="PATH", help="'-' for stdout (default)")
        p.add_argument("--metrics-json", metavar="PATH")
        p.add_argument("--trajectory-csv", metavar="PATH")

    p = sub.add_parser("generate", help="write a graph to a file")
    sources(p)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["mtx", "edges"], default="mtx")

    p = sub.add_parser("partition", help="write a block partition file")
    sources(p)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--parts", required=True, metavar="block:P")
    p.add_argument("--out", required=True)

    for name, hlp in (("color", "color a graph, optionally recolor"),
                      ("recolor", "recolor an existing coloring")):
        p = sub.add_parser(name, help=hlp)
        sources(p)
        algo(p)
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        p.add_argument("--coloring-out", metavar="PATH")
        if name == "recolor":
            p.add_argument("--coloring", required=True, metavar="PATH", help="'vertex color' lines")

    p = sub.add_parser("sweep", help="run presets/configs over graphs and seeds")
    sources(p, many=True)
    algo(p, many=True)
    p.add_argument("--seeds", type=_positive, default=1, help="number of seeds")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="first seed")
    return ap


def _run_config(ns, preset_name: str | None, seed: int) -> RunConfig:
    base = dict(PRESETS[preset_name]) if preset_name else {}
    flags = {"ordering": _ORDERINGS.get(ns.ordering) if ns.ordering else None,
             "selection": ns.selection, "mode": Mode(ns.mode) if ns.mode else None,
             "superstep": ns.superstep, "recolor_iters": ns.recolor_iters, "perm": ns.perm,
             "piggyback": ns.piggyback, "flavor": ns.recolor_flavor, "lag": ns.lag,
             "backend": ns.backend}
    base.update({k: v for k, v in flags.items() if v is not None})
    if ns.command == "recolor" and ns.recolor_iters is None:
        base["recolor_iters"] = 1
    env = os.environ.get("DISTCOLOR_MAX_ROUNDS")
    if env is not None:
        base["max_rounds"] = int(env)
        if base["max_rounds"] < 1:
            raise ValueError("DISTCOLOR_MAX_ROUNDS must be >= 1")
    return RunConfig(seed=seed, **base)


def parse_config(argv: list[str] | None = None) -> CliConfig:
    """Parse and validate ``argv``; exits with status 2 on usage errors."""
    ap = _build_parser()
    ns = ap.parse_args(argv)
    graphs = ns.graph or [f"mtx:{x}" for x in _aslist(ns.mtx)] or \
        [f"edges:{x}" for x in _aslist(ns.edges)] or [f"rmat:{x}" for x in _aslist(ns.rmat)]
    cfg = CliConfig(ns.command, _aslist(graphs))
    for src in cfg.graphs:
        if src.startswith("rmat:"):
            try:
                _rmat_params(src, 0)
            except ValueError as exc:
                ap.error(f"--graph {src}: {exc}")
    if ns.command in ("generate", "partition"):
        cfg.out, cfg.seeds = ns.out, [ns.seed]
        cfg.fmt = getattr(ns, "format", "mtx")
        cfg.parts = getattr(ns, "parts", None)
        if cfg.parts is not None and not cfg.parts.startswith("block:"):
            ap.error("--parts: partition only writes block partitions")
        return cfg
    cfg.parts, cfg.nparts = ns.parts, ns.nparts
    if not (cfg.parts.startswith("block:") or cfg.parts.startswith("file:")):
        ap.error(f"--parts {cfg.parts}: expected block:P or file:PATH")
    if cfg.parts.startswith("block:"):
        try:
            _positive(cfg.parts[6:])
        except (ValueError, argparse.ArgumentTypeError):
            ap.error(f"--parts {cfg.parts}: rank count must be a positive integer")
    cfg.metrics_csv, cfg.metrics_json, cfg.trajectory_csv = ns.metrics_csv, ns.metrics_json, ns.trajectory_csv
    try:
        if ns.command == "sweep":
            cfg.seeds = [ns.seed + i for i in range(ns.seeds)]
            for name in ns.preset or [None]:
                rc = _run_config(ns, name, ns.seed)
                cfg.configs[name or rc.label] = rc
            cfg.run = next(iter(cfg.configs.values()))
        else:
            cfg.seeds = [ns.seed]
            cfg.run = _run_config(ns, ns.preset, ns.seed)
            cfg.coloring_out = ns.coloring_out
            cfg.coloring_in = getattr(ns, "coloring", None)
    except ValueError as exc:
        ap.error(str(exc))
    return cfg


def _aslist(x):
    if x is None:
        return []
    return x if isinstance(x, list) else [x]


def _rmat_params(src: str, seed: int) -> RmatParams:
    fields = src[5:].split(",")
    if len(fields) not in (1, 2, 6):
        raise ValueError("expected rmat:scale[,ef[,a,b,c,d]]")
    scale = int(fields[0])
    ef = int(fields[1]) if len(fields) > 1 else 8
    kw = {"probs": tuple(float(x) for x in fields[2:])} if len(fields) == 6 else {}
    return RmatParams(scale, ef, seed=seed, **kw)


def load_graph(src: str, seed: int = DEFAULT_SEED) -> Graph:
    if src.startswith("rmat:"):
        return generate_rmat(_rmat_params(src, seed))
    kind, _, path = src.partition(":") if src.startswith(("mtx:", "edges:")) else ("", "", src)
    if not kind:
        kind = "mtx" if path.endswith(".mtx") else "edges"
    with open(path, encoding="utf-8") as fh:
        return load_matrix_market(fh) if kind == "mtx" else load_edge_list(fh)


def load_partition(spec: str, g: Graph, nparts: int | None = None) -> Partition:
    if spec.startswith("block:"):
        return block_partition(g, int(spec[6:]))
    path = spec[5:]
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    inferred = nparts is None
    if inferred:
        nparts = max((int(t) for t in text.split() if t.lstrip("-").isdigit()), default=0) + 1
    part = load_partition_file(io.StringIO(text), g, nparts)
    if inferred:
        idle = np.setdiff1d(np.arange(nparts), part.owner)
        if len(idle):
            raise PartitionError(f"ranks {idle.tolist()[:5]} own no vertex; pass --nparts to allow idle ranks")
    return part


def load_coloring(path: str, n: int) -> np.ndarray:
    colors = np.zeros(n, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            v, c = (int(x) for x in raw.split())
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} outside [0, {n})")
            if c < 1:
                raise ValueError(f"color {c} of vertex {v} must be >= 1")
            colors[v] = c
    return colors


def _open_out(path: str):
    if path == "-":
        return _NoClose(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


class _NoClose:
    def __init__(self, s):
        self.s = s

    def __enter__(self):
        return self.s

    def __exit__(self, *exc):
        self.s.flush()


def _write_outputs(cfg: CliConfig, rows: list[bench.SweepRow]) -> None:
    if cfg.metrics_csv:
        with _open_out(cfg.metrics_csv) as fh:
            bench.write_csv(rows, fh)
    if cfg.metrics_json:
        with _open_out(cfg.metrics_json) as fh:
            bench.write_json(rows, fh)
    if cfg.trajectory_csv:
        with _open_out(cfg.trajectory_csv) as fh:
            bench.write_trajectories(rows, fh)


def _graph_name(src: str) -> str:
    return src if src.startswith("rmat:") else Path(src.partition(":")[2] if src.startswith(("mtx:", "edges:")) else src).stem


def _single(cfg: CliConfig) -> int:
    seed = cfg.seeds[0]
    g = load_graph(cfg.graphs[0], seed)
    part = load_partition(cfg.parts, g, cfg.nparts)
    rc = cfg.run
    if cfg.command == "color":
        colors, m = run_pipeline(g, part, rc)
    else:
        start = load_coloring(cfg.coloring_in, g.n)
        if check_validity(g, start):
            raise InvalidColoringError("input coloring has conflicting edges")
        colors, m = recolor_phase(build_rank_views(g, part), start, rc)
    bad = check_validity(g, colors)
    if bad:
        raise InvalidColoringError(f"{len(bad)} conflicting edges, e.g. {bad[:3]}")
    row = bench.SweepRow(_graph_name(cfg.graphs[0]), rc.label, [seed], [m])
    _write_outputs(cfg, [row])
    if cfg.coloring_out:
        with _open_out(cfg.coloring_out) as fh:
            fh.writelines(f"{v} {c}\n" for v, c in enumerate(colors.tolist()))
    return 0


def _sweep(cfg: CliConfig) -> int:
    graphs = {}
    for src in cfg.graphs:
        g = load_graph(src, cfg.seeds[0])
        graphs[_graph_name(src)] = (g, load_partition(cfg.parts, g, cfg.nparts))
    rows = bench.sweep(graphs, cfg.configs, cfg.seeds)
    _write_outputs(cfg, rows)
    print(bench.summary_table(rows), file=sys.stderr)
    return 1 if any(r.error for r in rows) else 0


def execute(cfg: CliConfig) -> int:
    """Run a parsed invocation; returns the process exit status."""
    if cfg.command == "generate":
        g = load_graph(cfg.graphs[0], cfg.seeds[0])
        with _open_out(cfg.out) as fh:
            (write_matrix_market if cfg.fmt == "mtx" else write_edge_list)(g, fh)
        return 0
    if cfg.command == "partition":
        g = load_graph(cfg.graphs[0], cfg.seeds[0])
        with _open_out(cfg.out) as fh:
            write_partition(load_partition(cfg.parts, g), fh)
        return 0
    if cfg.command == "sweep":
        return _sweep(cfg)
    return _single(cfg)


def main(argv: list[str] | None = None) -> int:
    cfg = parse_config(argv)
    try:
        return execute(cfg)
    except (OSError, ValueError, RuntimeError, AssertionError, MemoryError) as exc:
        print(f"distcolor: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

