"""Exact spectral ground truth: Laplacian forms, effective resistances, dominance checks.

Everything here works on materialized graphs and is meant for verification at
desk scale. Dense eigensolves are used up to ``eig_budget()`` vertices
(``SUBSPAR_EIG_BUDGET`` overrides, default 2000); above that the checks fall
back to sampled test vectors and say so in their reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg

from .expander import eig_budget
from .graph import StaticGraph, cut_values

EXHAUSTIVE_CUT_LIMIT = 14
C_MAX_UPPER = 16.0
C_MAX_RESISTANCE = 64.0
PSD_RTOL = 1e-9


@dataclass
class VerificationReport:
    check: str
    passed: bool
    slack: dict = field(default_factory=dict)
    trials: int = 0
    mode: str = "exact"
    per_seed: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def table(self) -> str:
        rows = [("check", self.check), ("result", "PASS" if self.passed else "FAIL"),
                ("mode", self.mode), ("trials", self.trials)]
        rows += [(k, v) for k, v in sorted(self.slack.items()) if not isinstance(v, (list, dict))]
        width = max(len(str(k)) for k, _ in rows)
        return "\n".join(f"{str(k):<{width}}  {_fmt(v)}" for k, v in rows)


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# -- Laplacians and quadratic forms -----------------------------------------------

def laplacian(g: StaticGraph) -> sp.csr_matrix:
    A = g.adjacency()
    return (sp.diags(g.weighted_degrees) - A).tocsr()


def laplacian_quadratic(g: StaticGraph, u) -> float:
    """``sum_{(x,y)} w(x,y) (u(x) - u(y))^2``."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (g.n,):
        raise ValueError(f"vector has shape {u.shape}, expected ({g.n},)")
    a, b, w = g.edges()
    return float(np.dot(w, (u[a] - u[b]) ** 2))


def quadratic_forms(g: StaticGraph, X: np.ndarray) -> np.ndarray:
    """Row-wise ``x^T L x`` for a stack of vectors ``X`` of shape ``(k, n)``."""
    L = laplacian(g)
    X = np.asarray(X, dtype=np.float64)
    return np.einsum("ij,ij->i", X, (L @ X.T).T)


# -- effective resistance -----------------------------------------------------------

def effective_resistance_exact(g: StaticGraph, s: int, t: int) -> float:
    """``(e_s - e_t)^T L^+ (e_s - e_t)``; ``inf`` when s and t are disconnected."""
    if s == t:
        return 0.0
    labels = connected_components(g.adjacency(), directed=False)[1]
    if labels[s] != labels[t]:
        return math.inf
    comp = np.flatnonzero(labels == labels[s])
    pos = {int(v): i for i, v in enumerate(comp)}
    L = laplacian(g)[comp][:, comp].tocsc()
    # ground t: potentials solve L_red phi = e_s with phi(t) = 0
    keep = np.array([i for i in range(len(comp)) if i != pos[t]])
    rhs = np.zeros(len(keep))
    rhs[np.searchsorted(keep, pos[s])] = 1.0
    Lr = L[keep][:, keep].toarray()
    phi = sla.solve(Lr, rhs, assume_a="pos")
    return float(phi[np.searchsorted(keep, pos[s])])


def pinv_resistances(g: StaticGraph, us, vs) -> np.ndarray:
    """Resistances from the dense Moore-Penrose pseudoinverse (inf across components)."""
    Lp = np.linalg.pinv(laplacian(g).toarray(), hermitian=True)
    us, vs = np.asarray(us), np.asarray(vs)
    R = Lp[us, us] + Lp[vs, vs] - 2 * Lp[us, vs]
    labels = connected_components(g.adjacency(), directed=False)[1]
    return np.where(labels[us] == labels[vs], R, np.inf)


def _grounded_inverse_resistances(g: StaticGraph, us, vs) -> np.ndarray:
    labels = connected_components(g.adjacency(), directed=False)[1]
    L = laplacian(g)
    R = np.full(len(us), np.inf)
    same = labels[us] == labels[vs]
    for c in np.unique(labels[us[same]]):
        comp = np.flatnonzero(labels == c)
        k = len(comp)
        M = np.zeros((k, k))
        if k > 1:
            Lc = L[comp][:, comp].toarray()[:-1, :-1]
            M[:-1, :-1] = sla.cho_solve(sla.cho_factor(Lc), np.eye(k - 1))
        local = np.full(g.n, -1)
        local[comp] = np.arange(k)
        sel = same & (labels[us] == c)
        a, b = local[us[sel]], local[vs[sel]]
        R[sel] = M[a, a] + M[b, b] - 2 * M[a, b]
    return R


def _sketched_resistances(g: StaticGraph, us, vs, rng, jl_eps=0.5, tol=1e-8) -> np.ndarray:
    a, b, w = g.edges()
    k = int(math.ceil(4 * math.log(max(g.n, 2)) / jl_eps ** 2))
    L = laplacian(g)
    Q = rng.choice([-1.0, 1.0], size=(k, len(w))) / math.sqrt(k)
    sw = np.sqrt(w)
    Y = np.empty((k, g.n))
    diag = L.diagonal()
    M = sp.diags(np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0))
    for i in range(k):
        z = np.zeros(g.n)
        np.add.at(z, a, Q[i] * sw)
        np.add.at(z, b, -Q[i] * sw)
        Y[i], _ = cg(L, z, rtol=tol, M=M, maxiter=2000)
    R = ((Y[:, us] - Y[:, vs]) ** 2).sum(axis=0)
    labels = connected_components(g.adjacency(), directed=False)[1]
    return np.where(labels[us] == labels[vs], R, np.inf)


def edge_resistances(g: StaticGraph, method: str = "auto", rng=None) -> np.ndarray:
    """Effective resistance of every canonical edge of ``g`` (order of ``g.edges()``).

    ``exact`` uses a grounded dense Cholesky inverse per component, ``pinv``
    the dense pseudoinverse, ``sketch`` a random-projection estimate with
    conjugate-gradient solves; ``auto`` is exact up to ``eig_budget()``
    vertices and sketched above.
    """
    u, v, _ = g.edges()
    if method == "auto":
        method = "exact" if g.n <= eig_budget() else "sketch"
    if method == "exact":
        return _grounded_inverse_resistances(g, u, v)
    if method == "pinv":
        return pinv_resistances(g, u, v)
    if method == "sketch":
        return _sketched_resistances(g, u, v, np.random.default_rng(rng))
    raise ValueError(f"unknown resistance method {method!r}")


# -- dominance checks -------------------------------------------------------------------

def _same_vertex_set(g, h):
    if g.n != h.n:
        raise ValueError(f"graphs have {g.n} and {h.n} vertices")


def _random_unit_vectors(n, k, rng):
    X = rng.standard_normal((k, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def check_lower_bound(g: StaticGraph, h: StaticGraph, epsilon: float, *, rtol: float = PSD_RTOL,
                      n_vectors: int = 500, seed: int = 0) -> VerificationReport:
    """``lambda_min(L_h - (1 - epsilon) L_g) >= -rtol * ||L_g||``."""
    _same_vertex_set(g, h)
    Lg, Lh = laplacian(g), laplacian(h)
    if g.n <= eig_budget():
        Lg_d = Lg.toarray()
        norm = float(np.linalg.eigvalsh(Lg_d)[-1]) if g.n else 0.0
        D = Lh.toarray() - (1 - epsilon) * Lg_d
        lam = float(np.linalg.eigvalsh(D)[0]) if g.n else 0.0
        mode = "exact"
    else:
        from scipy.sparse.linalg import eigsh
        norm = float(eigsh(Lg.astype(float), k=1, which="LA", return_eigenvectors=False)[0])
        X = _random_unit_vectors(g.n, n_vectors, np.random.default_rng(seed))
        lam = float(np.min(quadratic_forms(h, X) - (1 - epsilon) * quadratic_forms(g, X)))
        mode = "sampled"
    tol = rtol * max(norm, 1e-3)
    return VerificationReport("lower_bound", lam >= -tol,
                              {"lambda_min": lam, "tolerance": tol, "norm_Lg": norm, "epsilon": epsilon},
                              trials=1, mode=mode)


def _cut_masks(n, rng, exhaustive_limit, n_samples):
    if n <= exhaustive_limit:
        codes = np.arange(1 << n, dtype=np.int64)
        return ((codes[:, None] >> np.arange(n)) & 1).astype(bool), "exhaustive"
    return rng.random((n_samples, n)) < rng.random((n_samples, 1)), "sampled"


def check_upper_bound(g: StaticGraph, h: StaticGraph, epsilon: float, delta: float, *,
                      n_random: int = 100, cuts: bool = True, c_max: float = C_MAX_UPPER,
                      exhaustive_limit: int = EXHAUSTIVE_CUT_LIMIT, n_sampled_cuts: int = 2000,
                      seed: int = 0, vectors=None) -> VerificationReport:
    """Fit the additive constant c in ``x^T L_h x <= (1+eps) x^T L_g x + c delta ||x||^2``.

    Test vectors are ``n_random`` random unit vectors plus cut indicators (all
    subsets when ``n <= exhaustive_limit``, otherwise sampled), or ``vectors``
    if given. Passes when the largest fitted c is at most ``c_max``.
    """
    _same_vertex_set(g, h)
    rng = np.random.default_rng(seed)
    mode = "random"
    if vectors is not None:
        X = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        mode = "given"
    else:
        parts = [_random_unit_vectors(g.n, n_random, rng)] if n_random else []
        if cuts:
            masks, mode = _cut_masks(g.n, rng, exhaustive_limit, n_sampled_cuts)
            parts.append(masks.astype(np.float64))
        X = np.vstack(parts) if parts else np.zeros((0, g.n))
    sq = (X ** 2).sum(axis=1)
    X, sq = X[sq > 0], sq[sq > 0]
    qg, qh = quadratic_forms(g, X), quadratic_forms(h, X)
    excess = qh - (1 + epsilon) * qg
    scale = 1e-12 * np.maximum(1.0, qh)
    c = np.where(excess > scale, excess, 0.0) / (delta * sq)
    worst = int(np.argmax(c)) if len(c) else -1
    fitted = float(c[worst]) if len(c) else 0.0
    return VerificationReport(
        "upper_bound", fitted <= c_max,
        {"fitted_c": fitted, "c_max": c_max, "violation_fraction": float(np.mean(excess > scale)) if len(c) else 0.0,
         "worst_excess": float(excess[worst]) if len(c) else 0.0, "epsilon": epsilon, "delta": delta,
         "vectors": int(len(X))},
        trials=int(len(X)), mode=mode)


def check_cut_sandwich(g: StaticGraph, h: StaticGraph, epsilon: float, delta: float, *,
                       exhaustive_limit: int = EXHAUSTIVE_CUT_LIMIT, n_samples: int = 2000,
                       seed: int = 0, top: int = 5) -> VerificationReport:
    """Both cut inequalities, ``(1-eps)Cut_g <= Cut_h <= (1+eps)Cut_g + delta|U|``, per subset."""
    _same_vertex_set(g, h)
    rng = np.random.default_rng(seed)
    masks, mode = _cut_masks(g.n, rng, exhaustive_limit, n_samples)
    cg_, ch = cut_values(g, masks), cut_values(h, masks)
    size = masks.sum(axis=1)
    tol = 1e-9 * np.maximum(1.0, np.maximum(cg_, ch))
    low_gap = (1 - epsilon) * cg_ - ch
    up_gap = ch - (1 + epsilon) * cg_ - delta * size
    low_bad = low_gap > tol
    up_bad = up_gap > tol

    def worst(gap, bad):
        idx = np.flatnonzero(bad)
        idx = idx[np.argsort(-gap[idx])][:top]
        return [{"U": np.flatnonzero(masks[i]).tolist(), "violation": float(gap[i])} for i in idx]

    warnings = []
    if mode == "sampled":
        warnings.append(f"n={g.n} exceeds the exhaustive limit {exhaustive_limit}; sampled {len(masks)} subsets")
    return VerificationReport(
        "cut_sandwich", not (low_bad.any() or up_bad.any()),
        {"lower_violations": int(low_bad.sum()), "upper_violations": int(up_bad.sum()),
         "max_lower_gap": float(low_gap.max()), "max_upper_gap": float(up_gap.max()),
         "worst_lower": worst(low_gap, low_bad), "worst_upper": worst(up_gap, up_bad),
         "epsilon": epsilon, "delta": delta},
        trials=int(len(masks)), mode=mode, warnings=warnings)


def verify_resistance_sandwich(tg: StaticGraph, delta: float, *, c_max: float = C_MAX_RESISTANCE,
                               method: str = "pinv") -> VerificationReport:
    """Per-edge check of ``1/2 (1/d_s + 1/d_t) <= R(s,t) <= C (ln n / delta)(1/d_s + 1/d_t)``.

    Also reports Foster's identity ``sum_e w_e R_e = n - #components``.
    """
    u, v, w = tg.edges()
    d = tg.weighted_degrees
    R = edge_resistances(tg, method=method)
    inv = 1.0 / d[u] + 1.0 / d[v]
    lower = 0.5 * inv
    low_bad = R < lower * (1 - 1e-9)
    scale = math.log(tg.n) / delta if tg.n > 1 else 1.0
    fitted = float(np.max(R / (scale * inv))) if len(R) else 0.0
    ncomp = connected_components(tg.adjacency(), directed=False)[0]
    foster = float(np.dot(w, R)) if len(R) else 0.0
    target = tg.n - ncomp
    foster_rel = abs(foster - target) / max(target, 1)
    return VerificationReport(
        "resistance_sandwich", bool(not low_bad.any() and fitted <= c_max),
        {"fitted_C": fitted, "C_max": c_max, "lower_violations": int(low_bad.sum()),
         "min_lower_ratio": float(np.min(R / lower)) if len(R) else math.inf,
         "max_edge_resistance": float(R.max()) if len(R) else 0.0,
         "foster_sum": foster, "foster_target": target, "foster_rel_error": foster_rel, "delta": delta},
        trials=int(len(R)), mode=method)

