"""Vertex ownership and the per-rank view of a partitioned graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import PartitionError
from .graph import Graph


@dataclass(frozen=True, eq=False)
class Partition:
    owner: np.ndarray
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise PartitionError("need at least one rank")
        if len(self.owner) and (self.owner.min() < 0 or self.owner.max() >= self.p):
            raise PartitionError(f"owner outside [0, {self.p})")
        self.owner.setflags(write=False)

    def owned(self, rank: int) -> np.ndarray:
        return np.flatnonzero(self.owner == rank)


def block_partition(g: Graph, p: int) -> Partition:
    """Contiguous id ranges; the first ``n % p`` ranks get one extra vertex."""
    if not 1 <= p <= g.n:
        raise PartitionError(f"rank count {p} outside [1, {g.n}]")
    sizes = np.full(p, g.n // p)
    sizes[: g.n % p] += 1
    return Partition(np.repeat(np.arange(p), sizes), p)


def load_partition_file(stream: TextIO, g: Graph, p: int) -> Partition:
    """One owner per line (whitespace-separated tokens are also accepted)."""
    try:
        owner = np.array([int(t) for t in stream.read().split()], dtype=np.int64)
    except ValueError as exc:
        raise PartitionError(f"non-integer owner: {exc}") from None
    if len(owner) != g.n:
        raise PartitionError(f"partition lists {len(owner)} owners for {g.n} vertices")
    bad = np.flatnonzero((owner < 0) | (owner >= p))
    if len(bad):
        raise PartitionError(f"vertex {bad[0]} has owner {owner[bad[0]]} outside [0, {p})")
    return Partition(owner, p)


def write_partition(part: Partition, stream: TextIO) -> None:
    stream.writelines(f"{r}\n" for r in part.owner.tolist())


@dataclass(eq=False)
class RankView:
    """What one rank knows: its owned vertices, their edges, and ghosts.

    ``colors`` is the rank's working color table over global ids. Only the
    entries of owned vertices and ghosts are meaningful; ghosts start
    uncolored (0).
    """

    rank: int
    graph: Graph
    owner: np.ndarray
    owned: np.ndarray
    is_boundary: np.ndarray
    ghosts: np.ndarray
    cross_src: np.ndarray  # owned endpoint of every cross edge
    cross_dst: np.ndarray  # ghost endpoint of the same edge
    neighbor_ranks: list[int]
    colors: np.ndarray = field(repr=False)
    _touch: dict = field(default_factory=dict, repr=False)

    @property
    def boundary(self) -> np.ndarray:
        return self.owned[self.is_boundary]

    @property
    def internal(self) -> np.ndarray:
        return self.owned[~self.is_boundary]

    def owned_neighbors(self, v: int) -> np.ndarray:
        nb = self.graph.neighbors(v)
        return nb[self.owner[nb] == self.rank]

    def ghost_neighbors(self, v: int) -> list[tuple[int, int]]:
        nb = self.graph.neighbors(v)
        nb = nb[self.owner[nb] != self.rank]
        return list(zip(nb.tolist(), self.owner[nb].tolist()))

    def ghost_colors(self) -> dict[int, int]:
        return dict(zip(self.ghosts.tolist(), self.colors[self.ghosts].tolist()))

    def touches(self, q: int) -> np.ndarray:
        """Owned vertices with at least one neighbor owned by rank ``q``."""
        if q not in self._touch:
            self._touch[q] = np.unique(self.cross_src[self.owner[self.cross_dst] == q])
        return self._touch[q]


def build_rank_views(g: Graph, part: Partition) -> list[RankView]:
    if len(part.owner) != g.n:
        raise PartitionError("partition and graph disagree on vertex count")
    owner = part.owner
    src = np.repeat(np.arange(g.n), g.degrees)
    dst = g.indices
    cross = owner[src] != owner[dst]
    boundary_mask = np.zeros(g.n, dtype=bool)
    boundary_mask[src[cross]] = True
    views = []
    for r in range(part.p):
        owned = np.flatnonzero(owner == r)
        mine = cross & (owner[src] == r)
        cs, cd = src[mine], dst[mine]
        views.append(RankView(
            rank=r,
            graph=g,
            owner=owner,
            owned=owned,
            is_boundary=boundary_mask[owned],
            ghosts=np.unique(cd),
            cross_src=cs,
            cross_dst=cd,
            neighbor_ranks=np.unique(owner[cd]).tolist(),
            colors=np.zeros(g.n, dtype=np.int64),
        ))
    return views
