"""Small named graphs and an independent reference greedy for the tests."""
import numpy as np

from distcolor import Graph


def path(n):
    return Graph.from_edges(n, np.arange(n - 1), np.arange(1, n))


def triangle():
    return Graph.from_edges(3, [0, 1, 0], [1, 2, 2])


def star(leaves):
    return Graph.from_edges(leaves + 1, [0] * leaves, list(range(1, leaves + 1)))


def complete_bipartite(a, b):
    u = [i for i in range(a) for _ in range(b)]
    v = [a + j for _ in range(a) for j in range(b)]
    return Graph.from_edges(a + b, u, v)


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    u, v = zip(*(outer + spokes + inner))
    return Graph.from_edges(10, u, v)


def gnp(n, p, seed):
    rng = np.random.default_rng(seed)
    u, v = np.triu_indices(n, 1)
    keep = rng.random(len(u)) < p
    return Graph.from_edges(n, u[keep], v[keep])


def reference_greedy(edges, n, order):
    """Plain transcription of sequential first-fit greedy over an edge list."""
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    color = {}
    for v in order:
        forbidden = {color[w] for w in adj[v] if w in color}
        c = 1
        while c in forbidden:
            c += 1
        color[v] = c
    return [color[v] for v in range(n)]


def two_rank_scenario():
    """Two ranks, six boundary vertices vA..vF = 0..5, 13 colors in identity order.

    P1 owns vA, vB, vC (colored 12, 1, 3); P2 owns vD, vE, vF (5, 12, 13).
    vD touches all of P1's vertices, vE touches vB and vF touches vC.
    """
    from distcolor.partition import Partition

    g = Graph.from_edges(6, [3, 3, 3, 4, 5], [0, 1, 2, 1, 2])
    part = Partition(np.array([0, 0, 0, 1, 1, 1]), 2)
    colors = np.array([12, 1, 3, 5, 12, 13])
    return g, part, colors
