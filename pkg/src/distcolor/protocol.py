"""Speculative distributed coloring in rounds of supersteps.

Each round, every rank tentatively colors its uncolored vertices in chunks
of ``superstep`` vertices and ships the colors of boundary vertices to the
neighbor ranks after each chunk. At the end of the round every rank checks
its cross edges; of two equally colored endpoints the one with the lower
random priority is uncolored and retried next round.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .coloring import (
    FirstFit,
    Ordering,
    Selection,
    VertexDraws,
    check_validity,
    encode_selection,
    order_vertices,
)
from .errors import ConvergenceError
from .graph import Graph
from .metrics import RunMetrics
from .partition import Partition, RankView, build_rank_views
from .simulator import EMPTY, Mailbox, Poll, Recv, Send, Tick, run_spmd

PRIORITY_SALT = 0x5052


class Mode(enum.Enum):
    SYNC = "sync"
    ASYNC = "async"


@dataclass(frozen=True)
class ProtocolConfig:
    superstep: int = 100
    mode: Mode = Mode.SYNC
    ordering: Ordering = Ordering.NATURAL
    selection: Selection = FirstFit()
    seed: int = 0
    max_rounds: int = 1000
    lag: int = 1
    backend: str = "deterministic"

    def __post_init__(self):
        if self.superstep < 1:
            raise ValueError("superstep size must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("round cap must be >= 1")
        if self.lag < 0:
            raise ValueError("delivery lag must be >= 0")
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "ordering", Ordering(self.ordering))


def total_order(n: int, seed: int) -> np.ndarray:
    """Distinct random priority per vertex, shared by all ranks."""
    return np.random.default_rng([seed, PRIORITY_SALT]).permutation(n)


@dataclass(eq=False)
class RankState:
    view: RankView
    order: np.ndarray
    kind: int
    param: int
    start: int
    usage: np.ndarray
    mark: np.ndarray
    pending: np.ndarray  # owned and currently uncolored, over global ids
    step: np.ndarray  # superstep in which a vertex got its current color (owned and ghosts)
    touch: dict[int, np.ndarray] = field(default_factory=dict)


class Cluster:
    """Simulated ranks holding a partitioned graph, ready to run rounds."""

    def __init__(self, g: Graph, part: Partition, cfg: ProtocolConfig,
                 orders: list[np.ndarray] | None = None, priority: np.ndarray | None = None,
                 views: list[RankView] | None = None):
        self.graph = g
        self.part = part
        self.cfg = cfg
        if views is None:
            views = build_rank_views(g, part)
        for view in views:
            view.colors[:] = 0
        self.views = views
        self.mailbox = Mailbox(part.p)
        self.priority = total_order(g.n, cfg.seed) if priority is None else priority
        self.metrics = RunMetrics()
        self.round = 0
        self._chunks = [0] * part.p
        self.states = []
        for view in self.views:
            kind, param, start, bound = encode_selection(cfg.selection, g.max_degree, view.rank, part.p)
            order = order_vertices(view, cfg.ordering) if orders is None else np.asarray(orders[view.rank])
            pending = np.zeros(g.n, dtype=bool)
            pending[view.owned] = True
            st = RankState(view, order, kind, param, start,
                           usage=np.zeros(bound, dtype=np.int64),
                           mark=np.zeros(bound, dtype=np.int64),
                           pending=pending,
                           step=np.full(g.n, -1, dtype=np.int64))
            for q in view.neighbor_ranks:
                mask = np.zeros(g.n, dtype=bool)
                mask[view.touches(q)] = True
                st.touch[q] = mask
            self.states.append(st)

    def uncolored(self) -> int:
        return sum(int(st.pending.sum()) for st in self.states)

    def colors(self) -> np.ndarray:
        out = np.zeros(self.graph.n, dtype=np.int64)
        for view in self.views:
            out[view.owned] = view.colors[view.owned]
        return out

    def _round_program(self, st: RankState, rnd: int, tentative: dict):
        cfg, g, view = self.cfg, self.graph, st.view
        colors = view.colors
        todo = st.order[st.pending[st.order]]
        chunks = [todo[i:i + cfg.superstep] for i in range(0, len(todo), cfg.superstep)]
        draws = VertexDraws(cfg.seed, g.n, rnd).u if st.kind == K.RANDOM_X else np.zeros(1)
        no_steps = np.zeros(1, dtype=np.int64)
        active = set(view.neighbor_ranks)
        sync = cfg.mode is Mode.SYNC

        def absorb(msg):
            if len(msg.payload):
                colors[msg.payload[:, 0]] = msg.payload[:, 1]
                st.step[msg.payload[:, 0]] = msg.tag
            if msg.last:
                active.discard(msg.src)

        if not chunks:
            for q in view.neighbor_ranks:
                yield Send(q, EMPTY, tag=0, last=True)
        for k, chunk in enumerate(chunks):
            yield Tick()
            if not sync:
                for msg in (yield Poll()):
                    absorb(msg)
            K.color_vertices(g.indptr, g.indices, colors, chunk, st.kind, st.param, st.start,
                             draws, st.usage, st.mark, no_steps, -1)
            st.step[chunk] = k
            last = k == len(chunks) - 1
            for q in view.neighbor_ranks:
                sent = chunk[st.touch[q][chunk]]
                yield Send(q, np.column_stack([sent, colors[sent]]), tag=k, last=last)
            if sync:
                for q in sorted(active):
                    absorb((yield Recv(q)))
        for q in sorted(active):
            while q in active:
                absorb((yield Recv(q)))
        st.pending[todo] = False
        tentative[view.rank] = dict(zip(todo.tolist(), colors[todo].tolist()))
        self._chunks[view.rank] = len(chunks)


def run_round(cluster: Cluster) -> dict[int, dict[int, int]]:
    """Tentatively color every uncolored vertex; returns ``{rank: {vertex: color}}``.

    Synchronous ranks wait for their neighbors' messages of superstep ``k``
    before starting ``k + 1``; asynchronous ranks only read what has been
    delivered. Both end with all messages of the round delivered.
    """
    cfg = cluster.cfg
    tentative: dict[int, dict[int, int]] = {}
    cluster._chunks = [0] * cluster.part.p
    for st in cluster.states:
        st.step[:] = -1
    ticks = run_spmd((cluster._round_program(st, cluster.round, tentative) for st in cluster.states),
                     cluster.mailbox, cfg.backend, cfg.lag)
    m = cluster.metrics
    m.ticks += ticks
    m.supersteps += max(cluster._chunks)
    m.rounds += 1
    cluster.round += 1
    return tentative


def detect_and_resolve(cluster: Cluster, priority: np.ndarray | None = None):
    """Find equally colored cross edges and uncolor the lower-priority end.

    Each rank decides on its own from its color table; both owners of a
    cross edge reach the same verdict. Returns ``({rank: set of vertices to
    recolor}, number of conflicting edges)``.
    """
    priority = cluster.priority if priority is None else priority
    recolor: dict[int, set[int]] = {}
    conflicts = 0
    for st in cluster.states:
        view = st.view
        colors = view.colors
        u, w = view.cross_src, view.cross_dst
        clash = (colors[u] == colors[w]) & (colors[u] > 0)
        u, w = u[clash], w[clash]
        mine = u < w  # count each edge once, at the owner of its smaller endpoint
        conflicts += int(mine.sum())
        for a, b in zip(u[mine].tolist(), w[mine].tolist()):
            cluster.metrics.conflict_log.append(
                (a, b, cluster.round - 1, int(st.step[a]), int(st.step[b])))
        lose_own = np.unique(u[priority[u] < priority[w]])
        lose_ghost = np.unique(w[priority[w] < priority[u]])
        np.subtract.at(st.usage, colors[lose_own], 1)
        colors[lose_own] = 0
        colors[lose_ghost] = 0
        st.pending[lose_own] = True
        recolor[view.rank] = set(lose_own.tolist())
    cluster.metrics.conflicts += conflicts
    cluster.metrics.conflicts_per_round.append(conflicts)
    return recolor, conflicts


def run_protocol(g: Graph, part: Partition, cfg: ProtocolConfig = ProtocolConfig(),
                 orders: list[np.ndarray] | None = None,
                 views: list[RankView] | None = None) -> tuple[np.ndarray, RunMetrics]:
    """Color ``g`` on ``part.p`` simulated ranks until no conflict remains.

    ``orders`` overrides the per-rank visit order computed from
    ``cfg.ordering``. Prebuilt ``views`` of ``part`` may be passed to
    skip their construction; their color tables are reset.
    """
    t0 = time.perf_counter()
    cluster = Cluster(g, part, cfg, orders, views=views)
    left = cluster.uncolored()
    while left:
        if cluster.round >= cfg.max_rounds:
            raise ConvergenceError(f"{left} vertices still uncolored after {cfg.max_rounds} rounds")
        run_round(cluster)
        detect_and_resolve(cluster)
        now = cluster.uncolored()
        assert now < left, "a round must color at least one vertex for good"
        left = now
    colors = cluster.colors()
    bad = check_validity(g, colors)
    if bad:
        raise AssertionError(f"protocol produced conflicting edges, e.g. {bad[:3]}")
    m = cluster.metrics
    m.add_traffic(cluster.mailbox.traffic)
    m.num_colors = int(colors.max()) if g.n else 0
    m.trajectory = [m.num_colors]
    m.wall_time = time.perf_counter() - t0
    return colors, m
