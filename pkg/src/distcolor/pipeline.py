"""Initial coloring followed by optional recoloring, as one configured run."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .coloring import FirstFit, Ordering, RandomX, Selection, class_sizes, selection_label
from .graph import Graph
from .metrics import RunMetrics
from .partition import Partition, RankView, build_rank_views
from .protocol import Mode, ProtocolConfig, run_protocol
from .recolor import (
    RECOLOR_SALT,
    PermutationSchedule,
    build_class_permutation,
    recolor_async,
    recolor_iterations,
)

_ORDER_LETTER = {
    Ordering.NATURAL: "N",
    Ordering.LARGEST_FIRST: "L",
    Ordering.SMALLEST_LAST: "S",
    Ordering.INTERNAL_FIRST: "I",
    Ordering.BOUNDARY_FIRST: "B",
}


@dataclass(frozen=True)
class RunConfig:
    ordering: Ordering = Ordering.NATURAL
    selection: Selection = FirstFit()
    mode: Mode = Mode.SYNC
    superstep: int = 100
    recolor_iters: int = 0
    perm: str = "nd"
    piggyback: bool = True
    flavor: str = "sync"
    recolor_selection: Selection = FirstFit()
    seed: int = 0
    lag: int = 1
    max_rounds: int = 1000
    backend: str = "deterministic"

    def __post_init__(self):
        object.__setattr__(self, "ordering", Ordering(self.ordering))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.superstep < 1:
            raise ValueError("superstep must be >= 1")
        if self.recolor_iters < 0:
            raise ValueError("recolor iterations must be >= 0")
        if self.flavor not in ("sync", "async"):
            raise ValueError(f"unknown recolor flavor {self.flavor!r}")
        PermutationSchedule.parse(self.perm)

    @property
    def schedule(self) -> PermutationSchedule:
        return PermutationSchedule.parse(self.perm, self.recolor_iters)

    @property
    def label(self) -> str:
        """Compact name: selection, ordering, comm mode, permutation, iterations."""
        perm = self.schedule.label.replace("%", "").replace("^", "")
        return (f"{selection_label(self.selection)}{_ORDER_LETTER[self.ordering]}"
                f"{'S' if self.mode is Mode.SYNC else 'A'}{perm}{self.recolor_iters}")

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(self.superstep, self.mode, self.ordering, self.selection,
                              self.seed, self.max_rounds, self.lag, self.backend)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


PRESETS = {
    "speed": dict(selection=FirstFit(), ordering=Ordering.INTERNAL_FIRST, mode=Mode.SYNC,
                  recolor_iters=0, perm="nd"),
    "quality": dict(selection=RandomX(5), ordering=Ordering.INTERNAL_FIRST, mode=Mode.SYNC,
                    recolor_iters=1, perm="nd"),
}


def preset(name: str, **overrides) -> RunConfig:
    return RunConfig(**{**PRESETS[name], **overrides})


def recolor_phase(views: list[RankView], colors: np.ndarray, cfg: RunConfig) -> tuple[np.ndarray, RunMetrics]:
    """Apply ``cfg.recolor_iters`` recoloring iterations to a valid coloring."""
    schedule = cfg.schedule
    if cfg.flavor == "sync":
        colors, _, metrics = recolor_iterations(
            views, colors, schedule, cfg.recolor_selection, cfg.piggyback, cfg.seed, cfg.backend)
        return colors, metrics
    metrics = RunMetrics(num_colors=int(colors.max()))
    trajectory = [metrics.num_colors]
    for i in range(1, schedule.iterations + 1):
        rng = np.random.default_rng([cfg.seed, RECOLOR_SALT, i])
        perm = build_class_permutation(class_sizes(colors), schedule.kind_at(i), rng)
        pcfg = dataclasses.replace(cfg.protocol(), selection=cfg.recolor_selection, seed=cfg.seed + i)
        colors, m = recolor_async(views, colors, perm, pcfg)
        metrics.merge(m)
        trajectory.append(m.num_colors)
    metrics.trajectory = trajectory
    return colors, metrics


def run_pipeline(g: Graph, part: Partition, cfg: RunConfig) -> tuple[np.ndarray, RunMetrics]:
    """Color with the protocol, then recolor ``cfg.recolor_iters`` times."""
    colors, metrics = run_protocol(g, part, cfg.protocol())
    trajectory = [metrics.num_colors]
    if cfg.recolor_iters:
        colors, rm = recolor_phase(build_rank_views(g, part), colors, cfg)
        metrics.merge(rm)
        trajectory = rm.trajectory
    metrics.trajectory = trajectory
    metrics.num_colors = int(colors.max())
    return colors, metrics
