"""Undirected simple graphs in CSR form, file readers and the RMAT generator."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    EmptyGraphError,
    GraphFormatError,
    IndexOutOfBoundsError,
    MalformedHeaderError,
)

# RMAT quadrant probabilities used for the three synthetic graph classes.
RMAT_ER = (0.25, 0.25, 0.25, 0.25)
RMAT_GOOD = (0.45, 0.15, 0.15, 0.25)
RMAT_BAD = (0.55, 0.15, 0.15, 0.15)

# Refuse to draw more edge samples than this unless the caller raises the cap.
DEFAULT_MAX_SAMPLES = 1 << 27


@dataclass(frozen=True, eq=False)
class Graph:
    """Symmetric adjacency in CSR form; ``indices[indptr[v]:indptr[v+1]]``
    is the strictly increasing neighbor list of ``v``."""

    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Neighbor lists as plain Python lists (for pure-Python loops)."""
        return [a.tolist() for a in np.split(self.indices, self.indptr[1:-1])] if self.n else []

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Each undirected edge once, as arrays ``(u, v)`` with ``u < v``."""
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return src[keep], self.indices[keep]

    def check(self) -> None:
        """Assert the structural invariants (symmetry, simple, sorted)."""
        src = np.repeat(np.arange(self.n), self.degrees)
        dst = self.indices
        assert len(dst) % 2 == 0
        assert not np.any(src == dst), "self-loop"
        for v in range(self.n):
            nb = self.neighbors(v)
            assert np.all(np.diff(nb) > 0), f"adjacency of {v} not strictly sorted"
        fwd = np.sort(src * self.n + dst)
        bwd = np.sort(dst * self.n + src)
        assert np.array_equal(fwd, bwd), "adjacency not symmetric"

    @classmethod
    def from_edges(cls, n: int, u: Iterable[int], v: Iterable[int]) -> "Graph":
        """Build the simple undirected graph spanned by the pairs ``(u[i], v[i])``.

        Pairs are symmetrized; self-loops and duplicates are dropped.
        """
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("edge endpoint arrays differ in length")
        if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise IndexOutOfBoundsError(f"edge endpoint outside [0, {n})")
        keep = u != v
        u, v = u[keep], v[keep]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        key = np.unique(src * n + dst)
        src, dst = key // n, key % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(indptr, dst.astype(np.int64))

    @classmethod
    def from_adjacency(cls, adj: dict[int, Iterable[int]] | list[Iterable[int]]) -> "Graph":
        items = adj.items() if isinstance(adj, dict) else enumerate(adj)
        pairs = [(a, b) for a, nbrs in items for b in nbrs]
        n = len(adj) if not isinstance(adj, dict) else max(
            [k for k in adj] + [b for _, b in pairs], default=-1) + 1
        u, v = zip(*pairs) if pairs else ((), ())
        return cls.from_edges(n, u, v)


def load_matrix_market(stream: TextIO) -> Graph:
    """Read a MatrixMarket coordinate file as a simple undirected graph.

    Values are ignored; ``general`` matrices are symmetrized and the
    lower triangle of ``symmetric`` ones is mirrored.
    """
    header = stream.readline()
    tokens = header.strip().lower().split()
    if len(tokens) < 5 or tokens[0] != "%%matrixmarket":
        raise MalformedHeaderError(f"not a MatrixMarket header: {header.strip()!r}")
    obj, fmt, field, symmetry = tokens[1:5]
    if obj != "matrix" or fmt != "coordinate":
        raise MalformedHeaderError(f"unsupported MatrixMarket layout {obj} {fmt}")
    if field not in ("pattern", "real", "integer", "complex"):
        raise MalformedHeaderError(f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric", "skew-symmetric", "hermitian"):
        raise MalformedHeaderError(f"unsupported symmetry {symmetry!r}")

    line = stream.readline()
    while line and (line.startswith("%") or not line.strip()):
        line = stream.readline()
    try:
        nrows, ncols, nnz = (int(t) for t in line.split())
    except ValueError:
        raise MalformedHeaderError(f"bad size line: {line.strip()!r}") from None
    if nrows != ncols:
        raise GraphFormatError(f"adjacency matrix must be square, got {nrows}x{ncols}")
    if nrows == 0:
        raise EmptyGraphError("matrix declares zero vertices")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    k = 0
    for raw in stream:
        if raw.startswith("%") or not raw.strip():
            continue
        parts = raw.split()
        if k >= nnz:
            raise GraphFormatError("more entries than declared")
        try:
            i, j = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise GraphFormatError(f"bad entry line: {raw.strip()!r}") from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise IndexOutOfBoundsError(f"entry ({i}, {j}) outside {nrows}x{ncols}")
        rows[k], cols[k] = i - 1, j - 1
        k += 1
    if k != nnz:
        raise GraphFormatError(f"expected {nnz} entries, found {k}")
    return Graph.from_edges(nrows, rows, cols)


def write_matrix_market(g: Graph, stream: TextIO) -> None:
    u, v = g.edges()
    stream.write("%%MatrixMarket matrix coordinate pattern symmetric\n")
    stream.write(f"{g.n} {g.n} {len(u)}\n")
    for a, b in zip(u.tolist(), v.tolist()):
        stream.write(f"{b + 1} {a + 1}\n")


def load_edge_list(stream: TextIO, n: int | None = None) -> Graph:
    """Read ``u v`` lines (0-based). ``n`` defaults to 1 + the largest id."""
    us, vs = [], []
    for raw in stream:
        raw = raw.split("#", 1)[0].strip()
        if not raw:
            continue
        parts = raw.split()
        if len(parts) < 2:
            raise GraphFormatError(f"bad edge line: {raw!r}")
        try:
            us.append(int(parts[0]))
            vs.append(int(parts[1]))
        except ValueError:
            raise GraphFormatError(f"bad edge line: {raw!r}") from None
    if n is None:
        n = max(us + vs, default=-1) + 1
    if n == 0:
        raise EmptyGraphError("edge list has no vertices")
    return Graph.from_edges(n, us, vs)


def write_edge_list(g: Graph, stream: TextIO) -> None:
    u, v = g.edges()
    for a, b in zip(u.tolist(), v.tolist()):
        stream.write(f"{a} {b}\n")


@dataclass(frozen=True)
class RmatParams:
    scale: int
    edge_factor: int = 8
    probs: tuple[float, float, float, float] = RMAT_ER
    seed: int = 0

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.edge_factor < 1:
            raise ValueError("edge factor must be >= 1")
        if len(self.probs) != 4 or min(self.probs) < 0:
            raise ValueError("need four non-negative quadrant probabilities")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"quadrant probabilities sum to {sum(self.probs)}, not 1")


def generate_rmat(params: RmatParams, max_samples: int = DEFAULT_MAX_SAMPLES) -> Graph:
    """Recursive-matrix random graph on ``2**scale`` vertices.

    Draws ``edge_factor * n`` directed samples, each descending ``scale``
    levels of the adjacency matrix and picking a quadrant with the fixed
    probabilities ``(a, b, c, d)`` at every level. Duplicates and
    self-loops are dropped without resampling.
    """
    n = 1 << params.scale
    samples = params.edge_factor * n
    if samples > max_samples:
        raise MemoryError(f"{samples} RMAT samples exceed the cap of {max_samples}")
    rng = np.random.default_rng(params.seed)
    cum = np.cumsum(params.probs)[:3]
    u = np.zeros(samples, dtype=np.int64)
    v = np.zeros(samples, dtype=np.int64)
    for level in range(params.scale):
        quad = np.searchsorted(cum, rng.random(samples), side="right")
        bit = 1 << (params.scale - 1 - level)
        u += bit * (quad >> 1)
        v += bit * (quad & 1)
    return Graph.from_edges(n, u, v)
