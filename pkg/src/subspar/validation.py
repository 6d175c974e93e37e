"""Input coercion shared by the estimators and the command line."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import StaticGraph
from .oracle import OracleHandle


def check_graph(X) -> StaticGraph:
    """Coerce ``X`` to a :class:`StaticGraph`.

    Accepts a graph, a handle (materialized), or a symmetric adjacency matrix
    (dense or sparse) with a zero diagonal and nonnegative entries.
    """
    if isinstance(X, StaticGraph):
        return X
    if isinstance(X, OracleHandle):
        return X.materialize()
    A = sp.csr_matrix(X) if not sp.issparse(X) else X.tocsr()
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if A.nnz and not np.all(np.isfinite(A.data)):
        raise ValueError("adjacency contains non-finite entries")
    if A.nnz and A.data.min() < 0:
        raise ValueError("adjacency weights must be nonnegative")
    if A.diagonal().any():
        raise ValueError("adjacency has self-loops")
    if abs(A - A.T).sum() > 0:
        raise ValueError("adjacency is not symmetric")
    A = A.copy()
    A.eliminate_zeros()
    return StaticGraph.from_scipy(A)


def check_handle(X) -> OracleHandle:
    """Wrap ``X`` in an oracle handle unless it already is one."""
    if isinstance(X, OracleHandle):
        return X
    return OracleHandle(check_graph(X))


def check_vertex(v, n: int, name: str = "vertex") -> int:
    if isinstance(v, (bool, np.bool_)) or int(v) != v:
        raise ValueError(f"{name} must be an integer, got {v!r}")
    v = int(v)
    if not 0 <= v < n:
        raise ValueError(f"{name} {v} outside [0, {n})")
    return v
