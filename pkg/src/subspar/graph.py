"""In-memory undirected graphs, cut values and the edge-list file format."""

from __future__ import annotations

import hashlib
from fractions import Fraction
from os import PathLike
from typing import Iterable

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised for malformed edge-list files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StaticGraph:
    """Immutable undirected graph stored as symmetric CSR arrays.

    Each unordered pair appears at most once, weights are strictly positive and
    there are no self-loops. The order of ``indices[indptr[v]:indptr[v+1]]`` is
    the neighbor order seen by the edge oracle; ``from_edges`` sorts it, while
    ``from_neighbor_lists`` keeps the caller's order (the hardness gadgets rely
    on that).
    """

    __slots__ = ("n", "indptr", "indices", "data", "weighted", "_deg")

    def __init__(self, n, indptr, indices, data=None, weighted=None):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        if data is None:
            data = np.ones(len(self.indices))
            weighted = False if weighted is None else weighted
        self.data = np.asarray(data, dtype=np.float64)
        self.weighted = bool(weighted) if weighted is not None else not np.all(self.data == 1.0)
        self._deg = np.diff(self.indptr)
        for arr in (self.indptr, self.indices, self.data):
            arr.flags.writeable = False

    # -- construction -------------------------------------------------
    @classmethod
    def from_edges(cls, n, edges, weights=None, *, merge: bool = True) -> "StaticGraph":
        """Build from an edge array; repeated pairs are merged by summing weights.

        With ``merge=False`` a repeated pair raises instead.
        """
        n = int(n)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=np.float64).ravel()
        if len(w) != len(e):
            raise ValueError("weights and edges differ in length")
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise ValueError(f"edge endpoint out of range for n={n}")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if not np.all(w > 0):
                raise ValueError("edge weights must be positive")
        u = np.minimum(e[:, 0], e[:, 1])
        v = np.maximum(e[:, 0], e[:, 1])
        key = u * n + v
        uniq, inv = np.unique(key, return_inverse=True)
        if len(uniq) < len(key) and not merge:
            raise ValueError("repeated edge")
        wsum = np.bincount(inv, weights=w, minlength=len(uniq))
        u, v = uniq // n, uniq % n
        weighted = weights is not None and not np.all(wsum == 1.0)
        if weights is None and len(uniq) < len(key):
            weighted = True
        return cls._from_canonical(n, u, v, wsum, weighted)

    @classmethod
    def _from_canonical(cls, n, u, v, w, weighted):
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        ww = np.concatenate([w, w])
        order = np.lexsort((cols, rows))
        rows, cols, ww = rows[order], cols[order], ww[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols, ww, weighted)

    @classmethod
    def from_neighbor_lists(cls, lists, weights=None) -> "StaticGraph":
        """Build from explicit per-vertex neighbor lists, keeping their order."""
        n = len(lists)
        lens = np.array([len(a) for a in lists], dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lens, out=indptr[1:])
        indices = np.concatenate([np.asarray(a, dtype=np.int64) for a in lists]) if n else np.zeros(0, np.int64)
        data = None
        if weights is not None:
            data = np.concatenate([np.asarray(a, dtype=np.float64) for a in weights])
        g = cls(n, indptr, indices, data, weights is not None)
        g._check_symmetric()
        return g

    @classmethod
    def from_scipy(cls, A) -> "StaticGraph":
        A = sp.triu(sp.csr_matrix(A), k=1).tocoo()
        keep = A.data != 0
        w = A.data[keep].astype(np.float64)
        return cls.from_edges(A.shape[0], np.column_stack([A.row[keep], A.col[keep]]),
                              None if np.all(w == 1.0) else w)

    def _check_symmetric(self):
        rows = np.repeat(np.arange(self.n), self._deg)
        if np.any(rows == self.indices):
            raise ValueError("self-loops are not allowed")
        if np.any(self.data <= 0):
            raise ValueError("edge weights must be positive")
        fwd = rows * self.n + self.indices
        if len(np.unique(fwd)) != len(fwd):
            raise ValueError("repeated neighbor")
        a = np.lexsort((self.indices, rows))
        b = np.lexsort((rows, self.indices))
        if not (np.array_equal(rows[a], self.indices[b]) and np.array_equal(self.indices[a], rows[b])
                and np.array_equal(self.data[a], self.data[b])):
            raise ValueError("adjacency is not symmetric")

    # -- queries ----------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        """Neighbor counts (unweighted degrees)."""
        return self._deg

    @property
    def weighted_degrees(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), self._deg)
        return np.bincount(rows, weights=self.data, minlength=self.n)

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self.data[self.indptr[v]:self.indptr[v + 1]]

    def edges(self):
        """Canonical ``(u, v, w)`` arrays with ``u < v``, sorted by ``(u, v)``."""
        rows = np.repeat(np.arange(self.n), self._deg)
        mask = rows < self.indices
        u, v, w = rows[mask], self.indices[mask], self.data[mask]
        order = np.lexsort((v, u))
        return u[order], v[order], w[order]

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))

    def edge_dict(self) -> dict:
        u, v, w = self.edges()
        return {(int(a), int(b)): float(c) for a, b, c in zip(u, v, w)}

    def total_weight(self) -> float:
        return float(self.data.sum() / 2)

    def union(self, other: "StaticGraph") -> "StaticGraph":
        """Weighted union on the same vertex set; shared pairs add up."""
        if other.n != self.n:
            raise ValueError("vertex counts differ")
        u1, v1, w1 = self.edges()
        u2, v2, w2 = other.edges()
        return StaticGraph.from_edges(self.n, np.column_stack([np.concatenate([u1, u2]), np.concatenate([v1, v2])]),
                                      np.concatenate([w1, w2]))

    def components(self) -> np.ndarray:
        from scipy.sparse.csgraph import connected_components
        return connected_components(self.adjacency(), directed=False)[1]

    def is_connected(self) -> bool:
        return self.n <= 1 or int(self.components().max()) == 0

    def fingerprint(self) -> str:
        u, v, w = self.edges()
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        for arr in (u, v, w):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, StaticGraph):
            return NotImplemented
        return self.n == other.n and self.edge_dict() == other.edge_dict()

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        kind = "weighted" if self.weighted else "unweighted"
        return f"StaticGraph(n={self.n}, m={self.m}, {kind})"


def as_mask(n: int, U) -> np.ndarray:
    """Boolean membership vector for a vertex set given as indices or a mask."""
    U = np.asarray(U)
    if U.dtype == bool:
        if U.shape != (n,):
            raise ValueError("mask has wrong length")
        return U
    mask = np.zeros(n, dtype=bool)
    if U.size:
        idx = U.astype(np.int64).ravel()
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError("vertex out of range")
        mask[idx] = True
    return mask


def cut_value(g: StaticGraph, U) -> float:
    """Total weight of edges with exactly one endpoint in ``U``."""
    mask = as_mask(g.n, U)
    u, v, w = g.edges()
    return float(w[mask[u] != mask[v]].sum())


def cut_values(g: StaticGraph, masks: np.ndarray) -> np.ndarray:
    """Cut values for a stack of boolean masks of shape ``(k, n)``."""
    u, v, w = g.edges()
    masks = np.asarray(masks, dtype=bool)
    out = np.empty(len(masks))
    step = max(1, 2_000_000 // max(1, len(u)))
    for s in range(0, len(masks), step):
        blk = masks[s:s + step]
        out[s:s + step] = (blk[:, u] != blk[:, v]) @ w
    return out


# -- edge-list files ----------------------------------------------------------

def _format_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def store_edge_list(g: StaticGraph, path: str | PathLike) -> None:
    u, v, w = g.edges()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.m}\n")
        if g.weighted:
            fh.writelines(f"{a} {b} {_format_weight(c)}\n" for a, b, c in zip(u, v, w))
        else:
            fh.writelines(f"{a} {b}\n" for a, b in zip(u, v))


def _parse_weight(tok: str, lineno: int) -> float:
    try:
        w = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise GraphFormatError(f"bad weight {tok!r}", lineno) from None
    if w <= 0:
        raise GraphFormatError("weights must be positive", lineno)
    return float(w)


def parse_edge_list(lines: Iterable[str]) -> StaticGraph:
    header = None
    seen: dict[tuple[int, int], float] = {}
    weighted = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 2:
                raise GraphFormatError("header must be 'n m'", lineno)
            try:
                header = (int(toks[0]), int(toks[1]))
            except ValueError:
                raise GraphFormatError("header must be two integers", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise GraphFormatError("negative header value", lineno)
            continue
        if len(toks) not in (2, 3):
            raise GraphFormatError("expected 'u v [w]'", lineno)
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphFormatError("endpoints must be integers", lineno) from None
        if not (0 <= a < header[0] and 0 <= b < header[0]):
            raise GraphFormatError(f"endpoint out of range [0, {header[0]})", lineno)
        if a == b:
            raise GraphFormatError("self-loop", lineno)
        w = _parse_weight(toks[2], lineno) if len(toks) == 3 else 1.0
        weighted |= len(toks) == 3
        key = (min(a, b), max(a, b))
        if key in seen:
            if seen[key] != w:
                raise GraphFormatError(f"edge {key} repeated with a different weight", lineno)
            raise GraphFormatError(f"edge {key} repeated", lineno)
        seen[key] = w
    if header is None:
        raise GraphFormatError("missing header", None)
    n, m = header
    if len(seen) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(seen)}", None)
    if not seen:
        return StaticGraph(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    keys = np.array(list(seen.keys()), dtype=np.int64)
    w = np.array(list(seen.values()))
    return StaticGraph.from_edges(n, keys, w if weighted else None)


def load_edge_list(path: str | PathLike) -> StaticGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh)
