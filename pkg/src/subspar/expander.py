"""Constant-degree expanders with a measured spectral certificate."""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from .graph import StaticGraph
from .generators import complete_graph
from .rng import derive_seed

DEFAULT_DEGREE = 8
GAP_THRESHOLD = 0.9
MAX_RETRIES = 32
MODES = ("random-regular", "margulis")


def eig_budget(default: int = 2000) -> int:
    """Largest n handled with dense eigensolves; ``SUBSPAR_EIG_BUDGET`` overrides."""
    val = os.environ.get("SUBSPAR_EIG_BUDGET")
    return int(val) if val else default


class ExpanderConstructionError(RuntimeError):
    def __init__(self, message, best_lambda2):
        super().__init__(f"{message} (best lambda2={best_lambda2:.4f})")
        self.best_lambda2 = best_lambda2


class SpectralGap(NamedTuple):
    lambda2: float
    connected: bool


@dataclass(frozen=True)
class ExpanderGraph:
    graph: StaticGraph
    degree_bound: int
    target_size: int
    actual_size: int
    lambda2: float
    mode: str
    seed: int
    attempts: int = 1

    @property
    def n(self) -> int:
        return self.actual_size


def spectral_gap(g: StaticGraph, dense_limit: int = 1000) -> SpectralGap:
    """Magnitude of the second-largest eigenvalue of ``D^-1/2 A D^-1/2``.

    Disconnected graphs (including ones with isolated vertices) give exactly
    ``1.0`` with ``connected=False``.
    """
    n = g.n
    if n <= 1:
        return SpectralGap(0.0, True)
    ncomp = connected_components(g.adjacency(), directed=False)[0]
    if ncomp > 1:
        return SpectralGap(1.0, False)
    d = g.weighted_degrees
    s = 1.0 / np.sqrt(d)
    A = g.adjacency()
    N = sp.diags(s) @ A @ sp.diags(s)
    if n <= dense_limit:
        vals = np.linalg.eigvalsh(N.toarray())
        lam = vals[-2]
    else:
        vals = eigsh(N.tocsc(), k=2, which="LA", return_eigenvectors=False)
        lam = np.sort(vals)[0]
    return SpectralGap(float(min(1.0, abs(lam))), True)


def _random_regular(s: int, d: int, seed: int) -> StaticGraph:
    G = nx.random_regular_graph(d, s, seed=seed)
    e = np.array(sorted((min(a, b), max(a, b)) for a, b in G.edges()), dtype=np.int64).reshape(-1, 2)
    return StaticGraph.from_edges(s, e)


def margulis_graph(side: int) -> StaticGraph:
    """Margulis–Gabber–Galil graph on the ``side x side`` torus, loops and repeats collapsed."""
    x, y = np.divmod(np.arange(side * side), side)
    idx = lambda a, b: (a % side) * side + (b % side)  # noqa: E731
    targets = [idx(x + y, y), idx(x - y, y), idx(x + y + 1, y), idx(x - y - 1, y),
               idx(x, y + x), idx(x, y - x), idx(x, y + x + 1), idx(x, y - x - 1)]
    src = np.tile(np.arange(side * side), len(targets))
    dst = np.concatenate(targets)
    keep = src != dst
    merged = StaticGraph.from_edges(side * side, np.column_stack([src[keep], dst[keep]]))
    u, v, _ = merged.edges()
    return StaticGraph.from_edges(side * side, np.column_stack([u, v]))


def build_expander(s: int, mode: str = "random-regular", seed: int = 0, *,
                   degree: int = DEFAULT_DEGREE, gap_threshold: float = GAP_THRESHOLD,
                   max_retries: int = MAX_RETRIES) -> ExpanderGraph:
    """Connected graph on ``s..2s`` vertices, max degree ``degree``, lambda2 <= threshold.

    ``random-regular`` draws simple ``degree``-regular graphs (complete graphs
    when ``s <= degree``) and redraws until the spectral test passes;
    ``margulis`` is deterministic on the smallest square torus with at least
    ``s`` vertices. Two vertices can only form a single edge, which is accepted
    without the spectral test.
    """
    s = int(s)
    if s < 2:
        raise ValueError("expander needs at least 2 vertices")
    if mode not in MODES:
        raise ValueError(f"unknown expander mode {mode!r}; expected one of {MODES}")
    if mode == "margulis":
        side = math.isqrt(s - 1) + 1
        g = margulis_graph(side)
        gap = spectral_gap(g)
        if not gap.connected or gap.lambda2 > gap_threshold:
            raise ExpanderConstructionError(f"margulis torus {side}x{side} fails the gap test", gap.lambda2)
        return ExpanderGraph(g, DEFAULT_DEGREE, s, g.n, gap.lambda2, mode, seed)

    if s <= degree + 1:
        g = complete_graph(s)
        gap = spectral_gap(g)
        return ExpanderGraph(g, degree, s, s, gap.lambda2, mode, seed)
    best = 1.0
    for attempt in range(max_retries):
        g = _random_regular(s, degree, derive_seed(seed, "expander", s, attempt))
        gap = spectral_gap(g)
        best = min(best, gap.lambda2)
        if gap.connected and gap.lambda2 <= gap_threshold:
            return ExpanderGraph(g, degree, s, s, gap.lambda2, mode, seed, attempt + 1)
    raise ExpanderConstructionError(f"no {degree}-regular graph on {s} vertices passed in {max_retries} tries",
                                    best)


def edge_disjoint_path_probe(e, pairs, len_bound: float = 4.0, *, c: float | None = None,
                             return_paths: bool = False):
    """Greedily route ``pairs`` along edge-disjoint paths of length <= len_bound*log2(n).

    Each pair takes a shortest path in what is left of the graph, whose edges
    are then removed. Returns how many pairs were routed. A statistical probe of
    the short-disjoint-paths property, not a certificate.
    """
    g = e.graph if isinstance(e, ExpanderGraph) else e
    n = g.n
    pairs = [(int(a), int(b)) for a, b in pairs]
    if c is not None and n > 1 and len(pairs) > c * n / math.log2(n):
        raise ValueError(f"too many pairs: {len(pairs)} > {c}*n/log2(n)")
    max_len = max(1, int(math.ceil(len_bound * math.log2(max(n, 2)))))
    adj = [set(map(int, g.neighbors(v))) for v in range(n)]
    routed = 0
    paths = []
    for a, b in pairs:
        path = _bfs_path(adj, a, b, max_len)
        if path is None:
            paths.append(None)
            continue
        for x, y in zip(path, path[1:]):
            adj[x].discard(y)
            adj[y].discard(x)
        routed += 1
        paths.append(path)
    return (routed, paths) if return_paths else routed


def _bfs_path(adj, a, b, max_len):
    if a == b:
        return [a]
    parent = {a: None}
    frontier = deque([(a, 0)])
    while frontier:
        x, dist = frontier.popleft()
        if dist == max_len:
            continue
        for y in adj[x]:
            if y in parent:
                continue
            parent[y] = x
            if y == b:
                path = [b]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            frontier.append((y, dist + 1))
    return None
