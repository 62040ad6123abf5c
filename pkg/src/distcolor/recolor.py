"""Iterated greedy recoloring over color classes, on the simulated cluster.

A recoloring pass visits the color classes of an existing coloring in a
chosen order and greedily colors each class as a block. Classes are
independent sets, so ranks color a whole class at once without creating
conflicts, and a first-fit pass never uses more colors than it started
with.
"""
from __future__ import annotations

import enum
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K
from .coloring import FirstFit, Selection, VertexDraws, check_validity, class_sizes, encode_selection
from .errors import InvalidColoringError
from .metrics import RunMetrics
from .partition import Partition, RankView
from .protocol import ProtocolConfig, run_protocol
from .simulator import Mailbox, Recv, Send, Tick, run_spmd

RECOLOR_SALT = 0x5243


class Permutation(enum.Enum):
    REVERSE = "rv"
    NON_INCREASING = "ni"
    NON_DECREASING = "nd"
    RANDOM = "rand"


@dataclass(frozen=True)
class ColorClassPermutation:
    kind: Permutation | None
    order: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.order) != list(range(1, len(self.order) + 1)):
            raise ValueError("class order must be a permutation of 1..num_colors")

    @property
    def num_colors(self) -> int:
        return len(self.order)

    def positions(self) -> np.ndarray:
        """``pos[c]`` is the 1-based step at which class ``c`` is colored."""
        pos = np.zeros(len(self.order) + 1, dtype=np.int64)
        pos[list(self.order)] = np.arange(1, len(self.order) + 1)
        return pos

    @classmethod
    def explicit(cls, order: Sequence[int]) -> "ColorClassPermutation":
        return cls(None, tuple(int(c) for c in order))


def build_class_permutation(sizes: Mapping[int, int], kind: Permutation | str,
                            rng: np.random.Generator | None = None) -> ColorClassPermutation:
    """Order the color classes ``1..max(sizes)``; ties go to the smaller color."""
    kind = Permutation(kind)
    k = max(sizes, default=0)
    missing = [c for c in range(1, k + 1) if c not in sizes]
    if missing:
        raise ValueError(f"no class size for colors {missing}")
    colors = list(range(1, k + 1))
    if kind is Permutation.REVERSE:
        order = colors[::-1]
    elif kind is Permutation.NON_INCREASING:
        order = sorted(colors, key=lambda c: (-sizes[c], c))
    elif kind is Permutation.NON_DECREASING:
        order = sorted(colors, key=lambda c: (sizes[c], c))
    else:
        if rng is None:
            raise ValueError("random permutation needs an rng")
        order = rng.permutation(colors).tolist()  # Fisher-Yates
    return ColorClassPermutation(kind, tuple(order))


@dataclass(frozen=True)
class PermutationSchedule:
    """Base permutation, optionally replaced by a random one on some iterations.

    ``inject`` is ``"none"``, ``"every"`` (iterations divisible by
    ``every``) or ``"pow2"`` (iterations 2, 4, 8, ...). Iterations count
    from 1.
    """

    base: Permutation = Permutation.NON_DECREASING
    inject: str = "none"
    every: int = 1
    iterations: int = 1

    def __post_init__(self):
        object.__setattr__(self, "base", Permutation(self.base))
        if self.inject not in ("none", "every", "pow2"):
            raise ValueError(f"unknown injection rule {self.inject!r}")
        if self.every < 1:
            raise ValueError("injection period must be >= 1")
        if self.iterations < 0:
            raise ValueError("iteration count must be >= 0")

    def kind_at(self, i: int) -> Permutation:
        if self.inject == "every" and i % self.every == 0:
            return Permutation.RANDOM
        if self.inject == "pow2" and i >= 2 and i & (i - 1) == 0:
            return Permutation.RANDOM
        return self.base

    @classmethod
    def parse(cls, text: str, iterations: int = 1) -> "PermutationSchedule":
        """``rv``, ``ni``, ``nd``, ``rand``, ``nd-rand:X`` or ``nd-rand-pow2``."""
        text = text.strip().lower()
        if text == "nd-rand-pow2":
            return cls(Permutation.NON_DECREASING, "pow2", 1, iterations)
        if text.startswith("nd-rand:"):
            return cls(Permutation.NON_DECREASING, "every", int(text.split(":", 1)[1]), iterations)
        return cls(Permutation(text), "none", 1, iterations)

    @property
    def label(self) -> str:
        base = self.base.value.upper()
        if self.inject == "every":
            return f"{base}-RAND%{self.every}"
        if self.inject == "pow2":
            return f"{base}-RAND%2^i"
        return base


@dataclass
class PiggybackPlan:
    """Flush schedule of every directed channel for one recoloring pass.

    ``flushes[src, dst]`` lists ``(step, vertices)``; step ``num_steps + 1``
    is the end-of-iteration flush.
    """

    num_steps: int
    flushes: dict[tuple[int, int], list[tuple[int, np.ndarray]]]
    baseline: dict[tuple[int, int], int]

    @property
    def end_step(self) -> int:
        return self.num_steps + 1

    def expected(self, rank: int) -> dict[int, list[int]]:
        """Steps at which ``rank`` receives, and from whom."""
        out: dict[int, list[int]] = defaultdict(list)
        for (src, dst), fl in sorted(self.flushes.items()):
            if dst == rank:
                for step, _ in fl:
                    out[step].append(src)
        return dict(out)

    @property
    def messages(self) -> int:
        return sum(len(fl) for fl in self.flushes.values())

    @property
    def precomm_messages(self) -> int:
        return len(self.flushes)

    @property
    def baseline_nonempty(self) -> int:
        return sum(self.baseline.values())


def plan_channel(view: RankView, dst: int, steps: np.ndarray, num_steps: int):
    """Flushes from ``view.rank`` to ``dst`` and the baseline non-empty count.

    Colors accumulate in a buffer that is sent whole at the end of the step
    right before ``dst`` first needs any of them; whatever is left goes out
    at the end of the iteration.
    """
    end = num_steps + 1
    to_q = view.owner[view.cross_dst] == dst
    b, a = view.cross_src[to_q], view.cross_dst[to_q]
    sb, sa = steps[b], steps[a]
    verts = np.unique(b)
    need = np.full(len(verts), end, dtype=np.int64)
    later = sa > sb
    np.minimum.at(need, np.searchsorted(verts, b[later]), sa[later])
    vstep = steps[verts]
    order = np.lexsort((verts, vstep))
    verts, vstep, need = verts[order], vstep[order], need[order]
    flushes = []
    start, deadline = 0, end
    for i in range(len(verts)):
        deadline = min(deadline, need[i])
        nxt = int(vstep[i + 1]) if i + 1 < len(verts) else end
        if nxt != vstep[i] and deadline <= nxt:
            # the receiver needs the buffer before anything else is added to it
            flushes.append((int(deadline) - 1 if deadline < end else end, verts[start:i + 1]))
            start, deadline = i + 1, end
    return flushes, len(np.unique(vstep))


def plan_piggyback(views: list[RankView], perm: ColorClassPermutation,
                   colors: np.ndarray) -> PiggybackPlan:
    """Whole-cluster flush plan for recoloring ``colors`` in ``perm`` order."""
    steps = perm.positions()[colors]
    flushes, baseline = {}, {}
    for view in views:
        for q in view.neighbor_ranks:
            flushes[view.rank, q], baseline[view.rank, q] = plan_channel(view, q, steps, perm.num_colors)
    return PiggybackPlan(perm.num_colors, flushes, baseline)


def _validate(colors: np.ndarray, views: list[RankView]) -> None:
    g = views[0].graph
    if check_validity(g, colors):
        raise InvalidColoringError("input coloring has conflicting edges")


def _recolor_program(view: RankView, perm: ColorClassPermutation, selection: Selection,
                     piggyback: bool, draws: np.ndarray, nranks: int):
    g = view.graph
    k = perm.num_colors
    old = view.colors
    steps = np.zeros(g.n, dtype=np.int64)
    known = np.concatenate([view.owned, view.ghosts])
    steps[known] = perm.positions()[old[known]]
    new = np.zeros(g.n, dtype=np.int64)
    kind, param, start, bound = encode_selection(selection, g.max_degree, view.rank, nranks)
    usage = np.zeros(bound, dtype=np.int64)
    mark = np.zeros(bound, dtype=np.int64)
    owned_steps = steps[view.owned]
    srt = np.lexsort((view.owned, owned_steps))
    cuts = np.searchsorted(owned_steps[srt], np.arange(1, k + 2))
    members = [view.owned[srt][cuts[j - 1]:cuts[j]] for j in range(1, k + 1)]
    nbrs = view.neighbor_ranks

    def absorb(msg):
        if len(msg.payload):
            new[msg.payload[:, 0]] = msg.payload[:, 1]

    if piggyback:
        out = {q: plan_channel(view, q, steps, k)[0] for q in nbrs}
        by_step = defaultdict(list)
        for q in nbrs:
            yield Send(q, np.array([s for s, _ in out[q]], dtype=np.int64), kind="precomm")
            for s, vs in out[q]:
                by_step[s].append((q, vs))
        expect = defaultdict(list)
        for q in nbrs:
            msg = yield Recv(q)
            for s in msg.payload.tolist():
                expect[s].append(q)
    else:
        touch = {q: np.isin(view.owned, view.touches(q)) for q in nbrs}
        touch = {q: view.owned[t] for q, t in touch.items()}

    for j in range(1, k + 1):
        yield Tick()
        verts = members[j - 1]
        bad = K.color_vertices(g.indptr, g.indices, new, verts, kind, param, start,
                               draws, usage, mark, steps, j)
        if bad >= 0:
            raise AssertionError(f"vertex {bad} reached step {j} before an earlier class neighbor's color")
        if piggyback:
            for q, vs in by_step.get(j, ()):
                yield Send(q, np.column_stack([vs, new[vs]]), tag=j)
            for q in expect.get(j, ()):
                absorb((yield Recv(q)))
        else:
            for q in nbrs:
                sent = verts[np.isin(verts, touch[q], assume_unique=True)]
                yield Send(q, np.column_stack([sent, new[sent]]), tag=j)
            for q in nbrs:
                absorb((yield Recv(q)))
    if piggyback:
        for q, vs in by_step.get(k + 1, ()):
            yield Send(q, np.column_stack([vs, new[vs]]), tag=k + 1)
        for q in expect.get(k + 1, ()):
            absorb((yield Recv(q)))
    view.colors[known] = new[known]


def recolor_sync(views: list[RankView], colors: np.ndarray, perm: ColorClassPermutation,
                 selection: Selection = FirstFit(), piggyback: bool = True, seed: int = 0,
                 iteration: int = 1, backend: str = "deterministic") -> tuple[np.ndarray, RunMetrics]:
    """One synchronous recoloring pass over the classes in ``perm`` order.

    Within a step each rank colors its members of the class in ascending id.
    With ``piggyback`` the per-step messages are replaced by the flush plan,
    announced to receivers by one pre-communication message per channel.
    """
    t0 = time.perf_counter()
    colors = np.asarray(colors, dtype=np.int64)
    _validate(colors, views)
    if perm.num_colors != int(colors.max()):
        raise ValueError(f"permutation covers {perm.num_colors} colors, coloring uses {colors.max()}")
    g = views[0].graph
    for view in views:
        view.colors[:] = 0
        view.colors[view.owned] = colors[view.owned]
        view.colors[view.ghosts] = colors[view.ghosts]
    draws = VertexDraws(seed, g.n, RECOLOR_SALT, iteration).u
    mailbox = Mailbox(len(views))
    ticks = run_spmd([_recolor_program(v, perm, selection, piggyback, draws, len(views)) for v in views],
                     mailbox, backend)
    out = np.zeros(g.n, dtype=np.int64)
    for view in views:
        out[view.owned] = view.colors[view.owned]
    bad = check_validity(g, out)
    if bad:
        raise AssertionError(f"recoloring created conflicts, e.g. {bad[:3]}")
    m = RunMetrics(num_colors=int(out.max()), supersteps=perm.num_colors, ticks=ticks,
                   trajectory=[int(colors.max()), int(out.max())])
    m.add_traffic(mailbox.traffic)
    m.wall_time = time.perf_counter() - t0
    return out, m


def recolor_iterations(views: list[RankView], colors: np.ndarray, schedule: PermutationSchedule,
                       selection: Selection = FirstFit(), piggyback: bool = True, seed: int = 0,
                       backend: str = "deterministic") -> tuple[np.ndarray, list[int], RunMetrics]:
    """Repeat ``recolor_sync``; returns the final coloring and the color-count trajectory.

    NI and ND use global class sizes, gathered with a reduce and a broadcast.
    """
    colors = np.asarray(colors, dtype=np.int64)
    trajectory = [int(colors.max())]
    total = RunMetrics(num_colors=trajectory[0])
    p = len(views)
    for i in range(1, schedule.iterations + 1):
        kind = schedule.kind_at(i)
        rng = np.random.default_rng([seed, RECOLOR_SALT, i])
        perm = build_class_permutation(class_sizes(colors), kind, rng)
        colors, m = recolor_sync(views, colors, perm, selection, piggyback, seed, i, backend)
        if kind in (Permutation.NON_INCREASING, Permutation.NON_DECREASING):
            m.reduction_msgs += 2 * (p - 1)
        trajectory.append(m.num_colors)
        total.merge(m)
    total.trajectory = trajectory
    return colors, trajectory, total


def recolor_async(views: list[RankView], colors: np.ndarray, perm: ColorClassPermutation,
                  cfg: ProtocolConfig = ProtocolConfig()) -> tuple[np.ndarray, RunMetrics]:
    """Recolor from scratch with the conflict-resolving protocol.

    Every rank visits its owned vertices by class position, then id, and
    the round/superstep protocol of ``cfg`` takes it from there; conflicts
    (and extra colors) are possible.
    """
    colors = np.asarray(colors, dtype=np.int64)
    _validate(colors, views)
    pos = perm.positions()
    g = views[0].graph
    orders = [v.owned[np.lexsort((v.owned, pos[colors[v.owned]]))] for v in views]
    part = Partition(views[0].owner, len(views))
    out, m = run_protocol(g, part, cfg, orders=orders)
    m.trajectory = [int(colors.max()), m.num_colors]
    return out, m
