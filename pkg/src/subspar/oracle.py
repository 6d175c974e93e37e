"""Query-counted access to graphs through vertex, degree and neighbor oracles.

A backend answers ``degree_array`` / ``neighbor_array`` (0-based neighbor slots)
and can ``materialize`` itself for verification. ``OracleHandle`` wraps a
backend, switches to the 1-based ``i``-th vertex / ``i``-th neighbor convention
of the general graph model and counts every call. Batched methods count one
call per element.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .graph import StaticGraph
from .generators import complete_graph


class OracleError(ValueError):
    """Out-of-range vertex or neighbor index."""


class ConfigError(ValueError):
    """Unsupported backend kind or malformed backend parameters."""


@dataclass(frozen=True)
class QueryCounts:
    vertex: int = 0
    degree: int = 0
    edge: int = 0

    @property
    def total(self) -> int:
        return self.vertex + self.degree + self.edge

    def __sub__(self, other: "QueryCounts") -> "QueryCounts":
        return QueryCounts(self.vertex - other.vertex, self.degree - other.degree, self.edge - other.edge)

    def to_dict(self) -> dict:
        return {**asdict(self), "total": self.total}


# -- backends -------------------------------------------------------------------

class ExplicitBackend:
    kind = "explicit"

    def __init__(self, graph: StaticGraph):
        self.graph = graph
        self.n = graph.n

    def degree_array(self, vs):
        return self.graph.degrees[vs]

    def neighbor_array(self, vs, slots):
        return self.graph.indices[self.graph.indptr[vs] + slots]

    def materialize(self) -> StaticGraph:
        return self.graph


class CompleteBackend:
    """K_n answered arithmetically; neighbors of ``v`` in increasing id order."""

    kind = "complete"

    def __init__(self, n: int):
        self.n = int(n)

    def degree_array(self, vs):
        return np.full(np.shape(vs), self.n - 1, dtype=np.int64)

    def neighbor_array(self, vs, slots):
        vs = np.asarray(vs)
        slots = np.asarray(slots)
        return slots + (slots >= vs)

    def materialize(self) -> StaticGraph:
        return complete_graph(self.n)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


class BlockBackend:
    """Stochastic block model without materializing edges.

    Vertices are laid out block by block. With a 0/1 probability matrix, degrees
    and neighbors are pure arithmetic over the blocks. Fractional entries decide
    each pair by a seeded hash of the pair, so answers stay fixed for the
    backend's lifetime; rows are then expanded lazily and cached.
    """

    kind = "stochastic-block"

    def __init__(self, sizes, probs, seed: int = 0):
        self.sizes = np.asarray(sizes, dtype=np.int64)
        P = np.asarray(probs, dtype=np.float64)
        B = len(self.sizes)
        if P.shape != (B, B):
            raise ConfigError(f"probability matrix must be {B}x{B}")
        if not np.allclose(P, P.T) or P.min() < 0 or P.max() > 1:
            raise ConfigError("probability matrix must be symmetric with entries in [0, 1]")
        if np.any(self.sizes < 0):
            raise ConfigError("block sizes must be nonnegative")
        self.P = P
        self.n = int(self.sizes.sum())
        self.seed = int(seed)
        self.starts = np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.int64)
        self.block_of = np.repeat(np.arange(B), self.sizes)
        self.exact = bool(np.all((P == 0) | (P == 1)))
        if self.exact:
            cnt = P.astype(np.int64) * self.sizes[None, :] - np.diag(np.diag(P).astype(np.int64))
            self._cnt = cnt
            self._cum = np.cumsum(cnt, axis=1)
        self._rows: dict[int, np.ndarray] = {}
        self._salt = np.uint64(_mix64(np.array([self.seed], dtype=np.uint64) + np.uint64(0x9E3779B97F4A7C15))[0])

    def _coins(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        lo = np.minimum(u, v).astype(np.uint64)
        hi = np.maximum(u, v).astype(np.uint64)
        h = _mix64(lo * np.uint64(self.n) + hi + self._salt)
        return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def _row(self, v: int) -> np.ndarray:
        row = self._rows.get(v)
        if row is None:
            others = np.arange(self.n)
            others = others[others != v]
            pr = self.P[self.block_of[v], self.block_of[others]]
            row = others[self._coins(np.full(len(others), v), others) < pr]
            self._rows[v] = row
        return row

    def degree_array(self, vs):
        vs = np.asarray(vs)
        if self.exact:
            return self._cum[self.block_of[vs], -1] if len(self.sizes) else np.zeros_like(vs)
        return np.array([len(self._row(int(v))) for v in vs.ravel()], dtype=np.int64).reshape(vs.shape)

    def neighbor_array(self, vs, slots):
        vs = np.asarray(vs)
        slots = np.asarray(slots)
        if not self.exact:
            return np.array([self._row(int(v))[int(s)] for v, s in zip(vs.ravel(), slots.ravel())],
                            dtype=np.int64).reshape(vs.shape)
        a = self.block_of[vs]
        cum = self._cum[a]
        b = (slots[..., None] >= cum).sum(axis=-1)
        prev = np.where(b > 0, np.take_along_axis(cum, np.maximum(b - 1, 0)[..., None], axis=-1)[..., 0], 0)
        u = self.starts[b] + (slots - prev)
        return u + ((b == a) & (u >= vs))

    def materialize(self) -> StaticGraph:
        if self.exact:
            u, v = np.triu_indices(self.n, k=1)
            keep = self.P[self.block_of[u], self.block_of[v]] == 1
        else:
            u, v = np.triu_indices(self.n, k=1)
            keep = self._coins(u, v) < self.P[self.block_of[u], self.block_of[v]]
        return StaticGraph.from_edges(self.n, np.column_stack([u[keep], v[keep]]))


# -- the counted handle -----------------------------------------------------------

class OracleHandle:
    """Counted access to a fixed graph through the three oracles.

    Vertex ids are ``0..n-1``; ``vertex(i)`` maps the 1-based index ``i`` to id
    ``i - 1``. ``neighbor(v, i)`` returns the ``i``-th neighbor, 1-based.
    """

    def __init__(self, backend):
        if isinstance(backend, StaticGraph):
            backend = ExplicitBackend(backend)
        self.backend = backend
        self.n = int(backend.n)
        self._vertex = 0
        self._degree = 0
        self._edge = 0

    @property
    def counts(self) -> QueryCounts:
        return QueryCounts(self._vertex, self._degree, self._edge)

    def _check_ids(self, vs):
        vs = np.asarray(vs, dtype=np.int64)
        if vs.size and (vs.min() < 0 or vs.max() >= self.n):
            raise OracleError(f"unknown vertex (valid ids are 0..{self.n - 1})")
        return vs

    def vertex(self, i: int) -> int:
        return int(self.vertices(np.array([i]))[0])

    def vertices(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 1 or idx.max() > self.n):
            raise OracleError(f"vertex index out of range [1, {self.n}]")
        self._vertex += idx.size
        return idx - 1

    def degree(self, v: int) -> int:
        return int(self.degrees(np.array([v]))[0])

    def degrees(self, vs) -> np.ndarray:
        vs = self._check_ids(vs)
        self._degree += vs.size
        return np.asarray(self.backend.degree_array(vs), dtype=np.int64)

    def neighbor(self, v: int, i: int) -> int:
        return int(self.neighbors(np.array([v]), np.array([i]))[0])

    def neighbors(self, vs, idx) -> np.ndarray:
        vs = self._check_ids(vs)
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size:
            d = self.backend.degree_array(vs)
            if idx.min() < 1 or np.any(idx > d):
                raise OracleError("neighbor index out of range [1, d(v)]")
        self._edge += idx.size
        return np.asarray(self.backend.neighbor_array(vs, idx - 1), dtype=np.int64)

    def materialize(self) -> StaticGraph:
        """Full graph for verification; not an oracle call and not counted."""
        return self.backend.materialize()

    def __repr__(self):
        c = self.counts
        return f"OracleHandle(n={self.n}, backend={self.backend.kind}, queries={c.total})"


class OverlayGraph:
    """Union of an oracle-accessed graph and a small graph placed on a vertex subset.

    Neighbor slots ``1..d_G(v)`` go to the base graph (counted on the base
    handle), slots ``d_G(v)+1..`` to the overlay (free: it is held locally).
    """

    def __init__(self, base: OracleHandle, overlay: StaticGraph, subset):
        subset = np.asarray(subset, dtype=np.int64)
        if len(subset) != overlay.n:
            raise OracleError(f"subset has {len(subset)} vertices, overlay has {overlay.n}")
        if len(np.unique(subset)) != len(subset):
            raise OracleError("subset entries must be distinct")
        if subset.size and (subset.min() < 0 or subset.max() >= base.n):
            raise OracleError("subset vertex out of range")
        self.base = base
        self.overlay = overlay
        self.mapping = subset
        self.n = base.n
        self.local = np.full(base.n, -1, dtype=np.int64)
        self.local[subset] = np.arange(len(subset))
        self.overlay_degree = np.zeros(base.n, dtype=np.int64)
        self.overlay_degree[subset] = overlay.degrees

    def base_degrees(self, vs) -> np.ndarray:
        return self.base.degrees(vs)

    def degree(self, v: int) -> int:
        return int(self.degrees(np.array([v]))[0])

    def degrees(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.int64)
        return self.base.degrees(vs) + self.overlay_degree[vs]

    def neighbor(self, v: int, i: int, base_degree: int | None = None) -> int:
        bd = None if base_degree is None else np.array([base_degree])
        return int(self.neighbors(np.array([v]), np.array([i]), bd)[0])

    def neighbors(self, vs, idx, base_degrees=None) -> np.ndarray:
        """``idx`` is 1-based. Pass known base degrees to avoid re-querying them."""
        vs = np.asarray(vs, dtype=np.int64)
        idx = np.asarray(idx, dtype=np.int64)
        bd = self.base.degrees(vs) if base_degrees is None else np.asarray(base_degrees, dtype=np.int64)
        if idx.size and (idx.min() < 1 or np.any(idx > bd + self.overlay_degree[vs])):
            raise OracleError("neighbor index out of range [1, d(v)]")
        out = np.empty(len(vs), dtype=np.int64)
        in_base = idx <= bd
        if in_base.any():
            out[in_base] = self.base.neighbors(vs[in_base], idx[in_base])
        ov = ~in_base
        if ov.any():
            loc = self.local[vs[ov]]
            slot = idx[ov] - bd[ov] - 1
            out[ov] = self.mapping[self.overlay.indices[self.overlay.indptr[loc] + slot]]
        return out

    def materialize(self) -> StaticGraph:
        """G plus overlay with shared pairs merged to weight 2 (verification only)."""
        g = self.base.materialize()
        u, v, _ = self.overlay.edges()
        ov = StaticGraph.from_edges(self.n, np.column_stack([self.mapping[u], self.mapping[v]]))
        return g.union(ov)


def implicit_backend(kind: str, params: dict | None = None, seed: int = 0) -> OracleHandle:
    """Handle over a complete, stochastic-block or explicit graph."""
    params = dict(params or {})
    if kind == "complete":
        return OracleHandle(CompleteBackend(int(params["n"])))
    if kind in ("stochastic-block", "sbm"):
        return OracleHandle(BlockBackend(params["sizes"], params["probs"], seed))
    if kind == "explicit":
        if "graph" in params:
            return OracleHandle(ExplicitBackend(params["graph"]))
        from .graph import load_edge_list
        return OracleHandle(ExplicitBackend(load_edge_list(params["path"])))
    raise ConfigError(f"unsupported backend kind {kind!r}")
