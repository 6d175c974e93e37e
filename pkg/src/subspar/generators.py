"""Small deterministic and random graph families used by tests and demos."""

import numpy as np

from .graph import StaticGraph


def empty_graph(n: int) -> StaticGraph:
    return StaticGraph(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))


def complete_graph(n: int) -> StaticGraph:
    u, v = np.triu_indices(n, k=1)
    return StaticGraph.from_edges(n, np.column_stack([u, v]))


def path_graph(n: int) -> StaticGraph:
    a = np.arange(n - 1)
    return StaticGraph.from_edges(n, np.column_stack([a, a + 1]))


def cycle_graph(n: int) -> StaticGraph:
    a = np.arange(n)
    return StaticGraph.from_edges(n, np.column_stack([a, (a + 1) % n]))


def star_graph(leaves: int) -> StaticGraph:
    """Center 0 joined to vertices 1..leaves."""
    a = np.arange(1, leaves + 1)
    return StaticGraph.from_edges(leaves + 1, np.column_stack([np.zeros_like(a), a]))


def gnp(n: int, p: float, rng) -> StaticGraph:
    """Erdős–Rényi G(n, p); ``rng`` is a numpy Generator or an int seed."""
    rng = np.random.default_rng(rng)
    u, v = np.triu_indices(n, k=1)
    keep = rng.random(len(u)) < p
    return StaticGraph.from_edges(n, np.column_stack([u[keep], v[keep]]))


def two_cliques_bridge(n: int) -> StaticGraph:
    """Cliques on ``[0, n//2)`` and ``[n//2, n)`` joined by the edge ``(n//2 - 1, n//2)``."""
    h = n // 2
    a = complete_graph(h).edges()
    b = complete_graph(n - h).edges()
    u = np.concatenate([a[0], b[0] + h, [h - 1]])
    v = np.concatenate([a[1], b[1] + h, [h]])
    return StaticGraph.from_edges(n, np.column_stack([u, v]))


def disjoint_union(graphs) -> StaticGraph:
    offs = 0
    us, vs, ws = [], [], []
    for g in graphs:
        u, v, w = g.edges()
        us.append(u + offs)
        vs.append(v + offs)
        ws.append(w)
        offs += g.n
    if not us:
        return empty_graph(0)
    weighted = any(g.weighted for g in graphs)
    return StaticGraph.from_edges(offs, np.column_stack([np.concatenate(us), np.concatenate(vs)]),
                                  np.concatenate(ws) if weighted else None)
