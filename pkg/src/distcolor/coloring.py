"""Sequential greedy coloring: visit orders, color selection, checks."""
from __future__ import annotations

import enum
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import _kernels as K
from .errors import InvalidColoringError
from .graph import Graph
from .partition import RankView


class Ordering(enum.Enum):
    NATURAL = "natural"
    LARGEST_FIRST = "lf"
    SMALLEST_LAST = "sl"
    INTERNAL_FIRST = "if"
    BOUNDARY_FIRST = "bf"


@dataclass(frozen=True)
class FirstFit:
    pass


@dataclass(frozen=True)
class StaggeredFirstFit:
    """First fit starting at a rank-dependent offset of an estimated palette.

    ``estimate=None`` means max degree + 1.
    """

    estimate: int | None = None

    def __post_init__(self):
        if self.estimate is not None and self.estimate < 1:
            raise ValueError("estimate must be >= 1")


@dataclass(frozen=True)
class LeastUsed:
    pass


@dataclass(frozen=True)
class RandomX:
    x: int

    def __post_init__(self):
        if self.x < 1:
            raise ValueError("Random-X needs X >= 1")


Selection = Union[FirstFit, StaggeredFirstFit, LeastUsed, RandomX]


def parse_selection(text: str) -> Selection:
    """``ff``, ``sff[:estimate]``, ``lu`` or ``randx:X``."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "ff" and not arg:
        return FirstFit()
    if name == "lu" and not arg:
        return LeastUsed()
    if name == "sff":
        return StaggeredFirstFit(int(arg) if arg else None)
    if name == "randx" and arg:
        return RandomX(int(arg))
    raise ValueError(f"unknown selection {text!r}")


def selection_label(sel: Selection) -> str:
    if isinstance(sel, FirstFit):
        return "F"
    if isinstance(sel, StaggeredFirstFit):
        return "S"
    if isinstance(sel, LeastUsed):
        return "L"
    return f"R{sel.x}"


def encode_selection(sel: Selection, max_degree: int, rank: int = 0, nranks: int = 1):
    """Kernel arguments ``(kind, param, start, bound)`` for a selection.

    ``bound`` is a size for the scratch arrays large enough to hold every
    color the selection can produce on a graph of this max degree.
    """
    if isinstance(sel, FirstFit):
        return K.FIRST_FIT, 0, 1, max_degree + 2
    if isinstance(sel, LeastUsed):
        return K.LEAST_USED, 0, 1, max_degree + 2
    if isinstance(sel, RandomX):
        return K.RANDOM_X, sel.x, 1, max_degree + sel.x + 1
    if isinstance(sel, StaggeredFirstFit):
        est = sel.estimate if sel.estimate is not None else max_degree + 1
        start = 1 + rank * math.ceil(est / nranks)
        if start > est:
            start = 1
        return K.STAGGERED, est, start, est + max_degree + 2
    raise TypeError(f"unknown selection {sel!r}")


class VertexDraws:
    """One uniform draw per vertex, fixed by ``(seed, *key)``.

    A vertex's draw does not depend on the order vertices are visited in.
    """

    def __init__(self, seed: int, n: int, *key: int):
        self.u = np.random.default_rng([seed, *key]).random(n)

    def integers(self, v: int, high: int) -> int:
        return min(int(self.u[v] * high), high - 1)


def num_colors(colors: np.ndarray) -> int:
    return int(colors.max()) if len(colors) else 0


def class_sizes(colors: np.ndarray) -> dict[int, int]:
    """Vertex count of every color ``1..num_colors`` (zeros included)."""
    counts = np.bincount(colors, minlength=num_colors(colors) + 1)
    return {c: int(counts[c]) for c in range(1, len(counts))}


def _smallest_last(verts: np.ndarray, degree: np.ndarray, local_adj) -> list[int]:
    buckets: list[OrderedDict] = [OrderedDict() for _ in range(int(degree.max(initial=0)) + 1)]
    deg = {}
    for v in verts.tolist():
        d = int(degree[v])
        deg[v] = d
        buckets[d][v] = None
    removed = []
    low = 0
    for _ in range(len(deg)):
        while not buckets[low]:
            low += 1
        v, _ = buckets[low].popitem(last=False)
        removed.append(v)
        del deg[v]
        for w in local_adj(v):
            d = deg.get(w)
            if d is not None:
                del buckets[d][w]
                buckets[d - 1][w] = None
                deg[w] = d - 1
        low = max(low - 1, 0)
    return removed[::-1]


def order_vertices(scope: Graph | RankView, kind: Ordering) -> np.ndarray:
    """Visit order over a whole graph or over one rank's owned vertices.

    Degrees are those of the locally known subgraph: for a rank that is the
    full degree of each owned vertex, since all its edges are known. Ties
    go to the smaller id. Smallest-last keeps each degree bucket in FIFO
    order, so a vertex whose degree drops joins the back of its new bucket;
    ghosts are never removed.
    """
    if isinstance(scope, Graph):
        g = scope
        verts = np.arange(g.n)
        boundary = np.zeros(g.n, dtype=bool)
        adj = g.adjacency
        local_adj = adj.__getitem__
    else:
        g = scope.graph
        verts = scope.owned
        boundary = scope.is_boundary
        owner, rank, adj = scope.owner, scope.rank, g.adjacency
        mine = owner == rank
        local_adj = lambda v: [w for w in adj[v] if mine[w]]  # noqa: E731
    kind = Ordering(kind)
    if kind is Ordering.NATURAL:
        return verts.copy()
    if kind is Ordering.INTERNAL_FIRST:
        return np.concatenate([verts[~boundary], verts[boundary]])
    if kind is Ordering.BOUNDARY_FIRST:
        return np.concatenate([verts[boundary], verts[~boundary]])
    if kind is Ordering.LARGEST_FIRST:
        return verts[np.lexsort((verts, -g.degrees[verts]))]
    if kind is Ordering.SMALLEST_LAST:
        return np.array(_smallest_last(verts, g.degrees, local_adj), dtype=np.int64)
    raise ValueError(f"unknown ordering {kind!r}")


def pick_color(forbidden, selection: Selection, usage: Mapping[int, int] | None = None,
               rng=None, rank: int = 0, nranks: int = 1, num_colors: int | None = None) -> int:
    """Choose a color for one vertex whose neighbors hold ``forbidden``.

    ``usage`` maps colors to local use counts (Least Used); ``num_colors``
    defaults to its largest key. ``rng`` needs an ``integers(high)`` method
    and is only consulted by Random-X.
    """
    forbidden = {int(c) for c in forbidden if c > 0}
    top = max(forbidden, default=0)
    usage = dict(usage or {})
    ncol = num_colors if num_colors is not None else max(usage, default=0)
    deg = max(top, ncol)
    kind, param, start, bound = encode_selection(selection, deg, rank, nranks)
    bound = max(bound, top + 2, ncol + 2)
    mark = np.zeros(bound, dtype=np.int64)
    mark[0] = 1
    mark[list(forbidden)] = 1
    use = np.zeros(bound, dtype=np.int64)
    for c, k in usage.items():
        use[c] = k
    use[0] = ncol
    idx = 0
    if kind == K.RANDOM_X:
        if rng is None:
            raise ValueError("Random-X needs an rng")
        idx = int(rng.integers(param))
    return int(K.select_color(mark, 1, kind, param, start, idx, use))


def greedy_color(g: Graph, order=None, selection: Selection = FirstFit(), seed: int = 0) -> np.ndarray:
    """Color the vertices one by one in ``order`` (natural by default).

    Random-X draws are keyed by ``(seed, 0, vertex)``. Returns an int array
    of colors ``>= 1``.
    """
    order = np.arange(g.n) if order is None else np.asarray(order, dtype=np.int64)
    if len(order) != g.n or not np.array_equal(np.sort(order), np.arange(g.n)):
        raise ValueError("order is not a permutation of the vertices")
    kind, param, start, bound = encode_selection(selection, g.max_degree)
    colors = np.zeros(g.n, dtype=np.int64)
    draws = VertexDraws(seed, g.n, 0).u if kind == K.RANDOM_X else np.zeros(1)
    K.color_vertices(g.indptr, g.indices, colors, order, kind, param, start, draws,
                     np.zeros(bound, dtype=np.int64), np.zeros(bound, dtype=np.int64),
                     np.zeros(1, dtype=np.int64), -1)
    return colors


def check_validity(g: Graph, colors: np.ndarray) -> list[tuple[int, int]]:
    """Monochromatic edges ``(u, v)``, ``u < v``; empty iff the coloring is proper."""
    colors = np.asarray(colors)
    if len(colors) != g.n or np.any(colors <= 0):
        raise InvalidColoringError("coloring is incomplete")
    u, v = g.edges()
    bad = colors[u] == colors[v]
    return list(zip(u[bad].tolist(), v[bad].tolist()))


def chromatic_oracle(g: Graph, cap: int = 12) -> int:
    """Exact chromatic number by exhaustive backtracking (small graphs only)."""
    if g.n > cap:
        raise ValueError(f"graph has {g.n} vertices, oracle cap is {cap}")
    if g.n == 0:
        return 0
    adj = g.adjacency
    colors = [0] * g.n

    def extend(v: int, k: int, used: int) -> bool:
        if v == g.n:
            return True
        taken = {colors[w] for w in adj[v] if w < v}
        # a fresh color is only tried once (the next unused one)
        for c in range(1, min(used + 1, k) + 1):
            if c not in taken:
                colors[v] = c
                if extend(v + 1, k, max(used, c)):
                    return True
        colors[v] = 0
        return False

    for k in range(1, g.n + 1):
        if extend(0, k, 0):
            return k
    return g.n
