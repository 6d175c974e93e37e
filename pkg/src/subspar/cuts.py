"""Cut problems solved on a sparsifier and certified against the original graph."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_flow

from .expander import eig_budget
from .graph import StaticGraph, as_mask, cut_value
from .oracle import OracleError, OracleHandle
from .rng import derive_seed
from .sparsifier import SparsifyConfig, max_delta, sublinear_sparsify
from .spectral import laplacian

BRUTE_FORCE_LIMIT = 20


class BudgetError(ValueError):
    """Instance too large for an exhaustive oracle."""


@dataclass
class CutResult:
    U: np.ndarray
    value: float
    sparsifier_value: float
    ratio: float | None = None
    iterations: int = 1
    certified: bool = False
    delta_schedule: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"U": [int(x) for x in self.U], "value": self.value, "sparsifier_value": self.sparsifier_value,
                "ratio": self.ratio, "iterations": self.iterations, "certified": self.certified,
                "delta_schedule": self.delta_schedule, "info": self.info}


# -- sparsest cut ----------------------------------------------------------------

def fiedler_vector(g: StaticGraph) -> np.ndarray:
    L = laplacian(g)
    if g.n <= eig_budget():
        _, vecs = np.linalg.eigh(L.toarray())
        return vecs[:, 1]
    from scipy.sparse.linalg import eigsh
    _, vecs = eigsh(L.tocsc().astype(float), k=2, sigma=-1e-6, which="LM")
    return vecs[:, 1]


def _prefix_cuts(g: StaticGraph, order: np.ndarray, kmax: int) -> np.ndarray:
    inside = np.zeros(g.n, dtype=bool)
    deg = g.weighted_degrees
    cuts = np.empty(kmax)
    cur = 0.0
    for k in range(kmax):
        x = order[k]
        nb, w = g.neighbors(x), g.neighbor_weights(x)
        cur += deg[x] - 2.0 * w[inside[nb]].sum()
        inside[x] = True
        cuts[k] = cur
    return cuts


def sweep_cut(g: StaticGraph) -> np.ndarray:
    """Best Fiedler-order prefix by ``Cut(U)/|U|`` among sizes ``1..n/2``.

    Both ends of the order are swept. A disconnected graph yields its
    smallest component.
    """
    n = g.n
    if n < 2:
        raise ValueError("sweep cut needs at least 2 vertices")
    labels = g.components()
    if labels.max() > 0:
        sizes = np.bincount(labels)
        return np.flatnonzero(labels == int(np.argmin(sizes)))
    f = fiedler_vector(g)
    kmax = n // 2
    best, best_U = math.inf, None
    for order in (np.argsort(f, kind="stable"), np.argsort(-f, kind="stable")):
        cuts = _prefix_cuts(g, order, kmax)
        ratios = cuts / np.arange(1, kmax + 1)
        k = int(np.argmin(ratios))
        if ratios[k] < best - 1e-12:
            best, best_U = ratios[k], np.sort(order[:k + 1])
    return best_U


def brute_force_sparsest_cut(g: StaticGraph) -> tuple[np.ndarray, float]:
    """Exhaustive minimum of ``Cut(U)/|U|`` over nonempty ``U`` with ``|U| <= n/2``.

    Ties go to the lexicographically smallest sorted ``U``.
    """
    n = g.n
    if n > BRUTE_FORCE_LIMIT:
        raise BudgetError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    if n < 2:
        raise ValueError("need at least 2 vertices")
    codes = np.arange(1, 1 << n, dtype=np.int64)
    size = np.zeros(len(codes), dtype=np.int64)
    for j in range(n):
        size += (codes >> j) & 1
    keep = size <= n // 2
    codes, size = codes[keep], size[keep]
    cut = np.zeros(len(codes))
    for a, b, w in zip(*g.edges()):
        cut += w * (((codes >> a) ^ (codes >> b)) & 1)
    ratio = cut / size
    best = ratio.min()
    ties = codes[np.isclose(ratio, best, rtol=1e-12, atol=1e-12)]
    sets = [tuple(j for j in range(n) if (c >> j) & 1) for c in ties]
    U = min(sets)
    return np.array(U, dtype=np.int64), float(best)


def _normalize_side(U, n):
    mask = as_mask(n, U)
    if mask.sum() > n / 2:
        mask = ~mask
    return np.flatnonzero(mask)


def sparsest_cut_driver(h: OracleHandle, subroutine=sweep_cut, alpha_estimate: float = 8.0,
                        cfg: SparsifyConfig | None = None, *, max_retries: int = 5,
                        measure_alpha: bool = True) -> CutResult:
    """Sparsify at (1/2, delta), cut the sparsifier, halve delta until it certifies.

    Starts from ``delta = 1/ln n`` and stops once ``delta <= OPT_bar / (2 alpha)``
    where ``OPT_bar`` is the sparsifier ratio of the returned set (a zero
    ratio certifies immediately). At most ``ceil(log2 n) + 2`` rounds are run;
    hitting that cap returns the last set uncertified.
    """
    if alpha_estimate < 1:
        raise ValueError("alpha_estimate must be >= 1")
    n = h.n
    if n < 2:
        raise ValueError("need at least 2 vertices")
    cfg = cfg or SparsifyConfig()
    delta = max_delta(n)
    max_rounds = math.ceil(math.log2(n)) + 2
    schedule = []
    certified = False
    queries = 0
    for it in range(1, max_rounds + 1):
        for attempt in range(max_retries):
            run = replace(cfg, epsilon=0.5, delta=delta, seed=derive_seed(cfg.seed, "driver", it, attempt))
            out = sublinear_sparsify(h, run)
            queries += out.query_report.total
            U = np.asarray(subroutine(out.graph), dtype=np.int64)
            if 0 < len(np.unique(U)) < n:
                break
        else:
            raise RuntimeError(f"subroutine returned a trivial cut {max_retries} times")
        U = _normalize_side(U, n)
        Hbar = out.graph
        opt_bar = cut_value(Hbar, U) / len(U)
        schedule.append({"iteration": it, "delta": delta, "opt_bar": opt_bar, "size": int(len(U))})
        if opt_bar == 0 or delta <= opt_bar / (2 * alpha_estimate):
            certified = True
            break
        if it < max_rounds:
            delta /= 2
    G = h.materialize()
    value = cut_value(G, U)
    info = {"alpha_estimate": alpha_estimate, "delta_exit": delta, "queries": queries}
    if measure_alpha and n <= BRUTE_FORCE_LIMIT:
        _, opt_h = brute_force_sparsest_cut(Hbar)
        info["alpha_measured"] = 1.0 if opt_bar == 0 else (opt_bar / opt_h if opt_h > 0 else math.inf)
    return CutResult(U, value, cut_value(Hbar, U), value / len(U), len(schedule), certified, schedule, info)


# -- minimum s-t cut -------------------------------------------------------------------

def max_flow_exact(g: StaticGraph, s: int, t: int) -> tuple[int, np.ndarray]:
    """Maximum s-t flow on integer capacities and the source side of a minimum cut."""
    if s == t:
        raise ValueError("s and t must differ")
    if not np.all(np.equal(np.mod(g.data, 1), 0)):
        raise ValueError("capacities must be integers")
    if g.data.sum() >= 2 ** 31:
        raise ValueError("total capacity overflows int32")
    A = sp.csr_matrix((g.data.astype(np.int32), g.indices, g.indptr), shape=(g.n, g.n))
    A.sort_indices()
    res = maximum_flow(A, int(s), int(t), method="dinic")
    F = res.flow.tocsr()
    R = (A.astype(np.int64) - F.astype(np.int64)).tocsr()
    R.eliminate_zeros()
    seen = np.zeros(g.n, dtype=bool)
    seen[s] = True
    queue = deque([s])
    while queue:
        x = queue.popleft()
        row = slice(R.indptr[x], R.indptr[x + 1])
        for y, r in zip(R.indices[row], R.data[row]):
            if r > 0 and not seen[y]:
                seen[y] = True
                queue.append(y)
    return int(res.flow_value), np.flatnonzero(seen)


def round_weights(g: StaticGraph, denominator: int) -> StaticGraph:
    """Integer graph with weights ``floor(w D + 1/2)``; edges rounding to 0 vanish."""
    u, v, w = g.edges()
    iw = np.floor(w * denominator + 0.5)
    keep = iw > 0
    return StaticGraph.from_edges(g.n, np.column_stack([u[keep], v[keep]]), iw[keep])


def min_st_cut_approx(h: OracleHandle, s: int, t: int, epsilon: float,
                      cfg: SparsifyConfig | None = None) -> CutResult:
    """Approximate minimum s-t cut with additive error of order ``epsilon n``.

    Sparsifies with multiplicative error ``epsilon/4`` and additive
    ``min(epsilon/4, 1/ln n)``, scales weights by the configured denominator,
    rounds half-up and runs an exact max-flow on the integer graph. The
    returned value is recomputed on the original graph.
    """
    n = h.n
    if not (0 <= s < n and 0 <= t < n) or s == t:
        raise OracleError(f"need distinct s, t in [0, {n}), got {s}, {t}")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    cfg = cfg or SparsifyConfig()
    run = replace(cfg, epsilon=epsilon / 4, delta=min(epsilon / 4, max_delta(n)))
    out = sublinear_sparsify(h, run)
    D = run.round_denominator
    Hint = round_weights(out.graph, D)
    flow, U = max_flow_exact(Hint, s, t)
    G = h.materialize()
    value = cut_value(G, U)
    info = {"flow_value_scaled": flow, "denominator": D, "rounding_bound": out.graph.m / D,
            "additive_budget": run.delta * n + out.graph.m / D, "epsilon": epsilon, "delta": run.delta,
            "queries": out.query_report.total, "sparsifier_edges": out.graph.m}
    return CutResult(U, value, cut_value(out.graph, U), None, 1, True, [run.delta], info)
