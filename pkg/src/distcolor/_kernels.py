"""Compiled inner loops for greedy color assignment.

Colors are positive ints, 0 means uncolored. ``mark`` is a scratch array
of forbidden-color stamps; ``mark[0]`` holds the last stamp handed out so
that consecutive calls never see stale marks. ``usage[c]`` counts how
often color ``c`` was assigned and ``usage[0]`` tracks the largest one.
"""
import numpy as np
from numba import njit

FIRST_FIT = 0
STAGGERED = 1
LEAST_USED = 2
RANDOM_X = 3


@njit(cache=True)
def select_color(mark, stamp, kind, param, start, idx, usage):
    size = mark.shape[0]
    if kind == STAGGERED:
        top = min(param, size - 1)
        for c in range(start, top + 1):
            if mark[c] != stamp:
                return c
        for c in range(1, min(start, top + 1)):
            if mark[c] != stamp:
                return c
        c = param + 1
        while c < size and mark[c] == stamp:
            c += 1
        return c
    if kind == LEAST_USED:
        best = 0
        best_use = np.iinfo(np.int64).max
        for c in range(1, min(usage[0], size - 1) + 1):
            if mark[c] != stamp and usage[c] < best_use:
                best = c
                best_use = usage[c]
        if best > 0:
            return best
    elif kind == RANDOM_X:
        k = 0
        c = 1
        while True:
            if c >= size or mark[c] != stamp:
                if k == idx:
                    return c
                k += 1
            c += 1
    c = 1
    while c < size and mark[c] == stamp:
        c += 1
    return c


@njit(cache=True)
def color_vertices(indptr, indices, colors, verts, kind, param, start,
                   draws, usage, mark, steps, step):
    """Greedily color ``verts`` in sequence, writing into ``colors``.

    With ``step >= 0`` every neighbor whose ``steps`` entry is below
    ``step`` must already be colored; the first vertex violating this is
    returned. Returns -1 otherwise.
    """
    size = mark.shape[0]
    for i in range(verts.shape[0]):
        v = verts[i]
        stamp = mark[0] + 1
        mark[0] = stamp
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            c = colors[w]
            if step >= 0 and c == 0 and steps[w] < step:
                return v
            if 0 < c < size:
                mark[c] = stamp
        idx = 0
        if kind == RANDOM_X:
            idx = min(int(draws[v] * param), param - 1)
        c = select_color(mark, stamp, kind, param, start, idx, usage)
        if c >= size:
            raise ValueError("color exceeds the scratch bound")
        colors[v] = c
        usage[c] += 1
        if c > usage[0]:
            usage[0] = c
    return -1
