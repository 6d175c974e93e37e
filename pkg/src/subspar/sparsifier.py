"""Sublinear-time probabilistic spectral sparsification.

The pipeline places a constant-degree expander on a random vertex subset of
size about ``delta * n``, samples ``q`` edges of the union with probability
``1/(n d(u)) + 1/(n d(v))`` through the oracles, reweights each sample by
``1/(q p)``, and finally resparsifies the (already small) sample by effective
resistances, which costs no further oracle calls.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .expander import MODES, ExpanderGraph, build_expander
from .graph import StaticGraph
from .oracle import OracleError, OracleHandle, OverlayGraph, QueryCounts
from .rng import derive_seed, stream, stream_entropy
from .spectral import edge_resistances

log = logging.getLogger(__name__)

DEFAULT_Q_MULTIPLIER = 0.125
DEFAULT_RESPARSIFY_CONSTANT = 8.0
DEFAULT_ROUND_DENOMINATOR = 1000
CHUNK = 1 << 20
MAX_REDRAWS = 64


class PreconditionError(ValueError):
    """Parameters outside the range where the sparsifier guarantee applies."""


class SamplingError(RuntimeError):
    pass


class ResparsifyWarning(UserWarning):
    pass


def max_delta(n: int) -> float:
    """Largest admissible delta, ``1 / ln n`` (1 for n <= 2)."""
    return 1.0 if n <= 2 else 1.0 / math.log(n)


@dataclass(frozen=True)
class SparsifyConfig:
    epsilon: float = 0.5
    delta: float = 0.1
    q_multiplier: float = DEFAULT_Q_MULTIPLIER
    seed: int = 0
    expander_mode: str = "random-regular"
    resparsify: bool = True
    round_denominator: int = DEFAULT_ROUND_DENOMINATOR
    resparsify_constant: float = DEFAULT_RESPARSIFY_CONSTANT

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise PreconditionError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.delta > 0:
            raise PreconditionError(f"delta must be positive, got {self.delta}")
        if not self.q_multiplier > 0:
            raise PreconditionError("q_multiplier must be positive")
        if self.expander_mode not in MODES:
            raise PreconditionError(f"expander_mode must be one of {MODES}")
        if self.round_denominator < 1:
            raise PreconditionError("round_denominator must be >= 1")

    def validate_for(self, n: int) -> None:
        if self.delta > max_delta(n) + 1e-12:
            raise PreconditionError(
                f"delta={self.delta} exceeds 1/ln n = {max_delta(n):.4f} for n={n}; "
                "the sparsifier guarantee requires delta <= 1/log n")

    def sample_count(self, n: int) -> int:
        """``q = C0 * ceil(n (ln n)^2 / (delta eps^2))``, at least 1."""
        if n < 2:
            return 0
        base = math.ceil(n * math.log(n) ** 2 / (self.delta * self.epsilon ** 2))
        return max(1, int(math.ceil(self.q_multiplier * base)))

    def overlay_size(self, n: int) -> int:
        """Requested expander size ``ceil(delta n)``; below 2 no overlay is placed."""
        s = int(math.ceil(self.delta * n - 1e-9))
        return s if s >= 2 else 0

    def edge_target(self, n: int) -> float:
        return self.resparsify_constant * n * math.log(max(n, 2)) / self.epsilon ** 2


@dataclass
class SparsifierOutput:
    graph: StaticGraph
    intermediate: StaticGraph
    query_report: QueryCounts
    v_delta: np.ndarray
    q: int
    config: SparsifyConfig
    expander: ExpanderGraph | None = None
    resparsified: bool = False
    seed_trace: dict = field(default_factory=dict)

    @property
    def intermediate_edges(self) -> int:
        return self.intermediate.m

    @property
    def edges(self) -> int:
        return self.graph.m

    def edge_constant(self) -> float:
        """Measured C1 in ``|E(H)| = C1 n ln n / eps^2``."""
        n = self.graph.n
        return self.graph.m * self.config.epsilon ** 2 / (n * math.log(n)) if n > 1 else 0.0

    def to_report(self) -> dict:
        n = self.graph.n
        return {
            "config": asdict(self.config),
            "n": n,
            "q": self.q,
            "queries": self.query_report.to_dict(),
            "intermediate_edges": self.intermediate_edges,
            "edges": self.edges,
            "edge_constant_C1": self.edge_constant(),
            "resparsified": self.resparsified,
            "v_delta_size": int(len(self.v_delta)),
            "expander": None if self.expander is None else {
                "mode": self.expander.mode, "size": self.expander.actual_size,
                "lambda2": self.expander.lambda2, "attempts": self.expander.attempts},
            "seed_trace": self.seed_trace,
        }


# -- building blocks -----------------------------------------------------------------

def pick_v_delta(h: OracleHandle, size: int, rng) -> np.ndarray:
    """Uniform ``size``-subset of the vertices, read through the vertex oracle."""
    size = int(size)
    if size > h.n or size < 0:
        raise OracleError(f"cannot pick {size} of {h.n} vertices")
    rng = np.random.default_rng(rng)
    idx = rng.choice(h.n, size=size, replace=False) + 1
    return h.vertices(idx)


class DegreeSampler:
    """Draws edges of an overlay graph with ``p(u,v) = 1/(n d(u)) + 1/(n d(v))``.

    Pick a uniform vertex ``w`` and a uniform slot among its ``d(w)``
    neighbors; the undirected edge is reached from either endpoint, which sums
    the two terms. Degrees are memoized so each vertex costs one degree query.
    """

    def __init__(self, tg: OverlayGraph | OracleHandle | StaticGraph):
        if isinstance(tg, StaticGraph):
            tg = OracleHandle(tg)
        if isinstance(tg, OracleHandle):
            tg = OverlayGraph(tg, StaticGraph(0, np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)), [])
        self.tg = tg
        self.n = tg.n
        self._base_deg = np.full(tg.n, -1, dtype=np.int64)

    def base_degrees(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.int64)
        unknown = np.unique(vs[self._base_deg[vs] < 0])
        if unknown.size:
            self._base_deg[unknown] = self.tg.base.degrees(unknown)
        return self._base_deg[vs]

    def degrees(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.int64)
        return self.base_degrees(vs) + self.tg.overlay_degree[vs]

    def __call__(self, k: int, rng):
        """``k`` draws as arrays ``(u, v, p)``."""
        n = self.n
        w = self.tg.base.vertices(rng.integers(n, size=k) + 1)
        d = self.degrees(w)
        for _ in range(MAX_REDRAWS):
            iso = np.flatnonzero(d == 0)
            if not iso.size:
                break
            w[iso] = self.tg.base.vertices(rng.integers(n, size=iso.size) + 1)
            d[iso] = self.degrees(w[iso])
        else:
            raise SamplingError("kept drawing isolated vertices; is the graph edgeless?")
        slot = (rng.random(k) * d).astype(np.int64) + 1
        np.minimum(slot, d, out=slot)
        u = self.tg.neighbors(w, slot, base_degrees=self.base_degrees(w))
        du = self.degrees(u)
        p = 1.0 / (n * d) + 1.0 / (n * du)
        return w, u, p


def sample_edge(tg, rng):
    """A single draw ``((u, v), p)``; see ``DegreeSampler``."""
    sampler = tg if isinstance(tg, DegreeSampler) else DegreeSampler(tg)
    u, v, p = sampler(1, np.random.default_rng(rng))
    return (int(u[0]), int(v[0])), float(p[0])


def sparsify(sampler, q: int, rng, n: int | None = None) -> StaticGraph:
    """Draw ``q`` edges via ``sampler(k, rng) -> (u, v, p)``; each adds weight ``1/(q p)``."""
    if q < 1:
        raise ValueError("q must be at least 1")
    n = sampler.n if n is None else n
    rng = np.random.default_rng(rng)
    keys, weights = [], []
    left = q
    while left:
        k = min(left, CHUNK)
        u, v, p = sampler(k, rng)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        key, inv = np.unique(lo * n + hi, return_inverse=True)
        keys.append(key)
        weights.append(np.bincount(inv, weights=1.0 / (q * p), minlength=len(key)))
        left -= k
    key, inv = np.unique(np.concatenate(keys), return_inverse=True)
    w = np.bincount(inv, weights=np.concatenate(weights), minlength=len(key))
    return StaticGraph.from_edges(n, np.column_stack([key // n, key % n]), w)


def _support_components(H: StaticGraph) -> int:
    labels = H.components()
    return len(np.unique(labels[H.degrees > 0]))


def resparsify(H: StaticGraph, epsilon: float, rng=None, *, constant: float = DEFAULT_RESPARSIFY_CONSTANT,
               method: str = "auto") -> StaticGraph:
    """Effective-resistance resampling down to at most ``constant * n ln n / eps^2`` edges.

    Samples ``floor(target)`` edges with probability proportional to
    ``w_e R_e`` and reweights by ``w_e / (q p_e)``. Graphs already under the
    target come back unchanged; so do graphs whose support is disconnected,
    with a ``ResparsifyWarning``.
    """
    n = H.n
    target = constant * n * math.log(max(n, 2)) / epsilon ** 2
    if H.m <= target:
        return H
    if _support_components(H) > 1:
        warnings.warn("support of H is disconnected; resparsification skipped", ResparsifyWarning, stacklevel=2)
        return H
    rng = np.random.default_rng(rng)
    u, v, w = H.edges()
    R = edge_resistances(H, method=method, rng=rng)
    lev = w * R
    p = lev / lev.sum()
    q = int(math.floor(target))
    counts = np.bincount(rng.choice(len(w), size=q, p=p), minlength=len(w))
    keep = counts > 0
    nw = counts[keep] * w[keep] / (q * p[keep])
    return StaticGraph.from_edges(n, np.column_stack([u[keep], v[keep]]), nw)


def build_overlay(h: OracleHandle, cfg: SparsifyConfig):
    """Expander, random placement ``V_delta`` and the composed view of the input."""
    n = h.n
    s = cfg.overlay_size(n)
    if s == 0:
        empty = StaticGraph(0, np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64))
        return None, np.zeros(0, dtype=np.int64), OverlayGraph(h, empty, [])
    expander = build_expander(s, cfg.expander_mode, derive_seed(cfg.seed, "expander"))
    if expander.actual_size > n:
        raise PreconditionError(f"expander has {expander.actual_size} vertices but the graph only {n}")
    v_delta = pick_v_delta(h, expander.actual_size, stream(cfg.seed, "vdelta"))
    return expander, v_delta, OverlayGraph(h, expander.graph, v_delta)


def sublinear_sparsify(h: OracleHandle, cfg: SparsifyConfig | None = None) -> SparsifierOutput:
    """Run the full pipeline against ``h``; the only input access is through its oracles."""
    cfg = cfg or SparsifyConfig()
    n = h.n
    cfg.validate_for(n)
    start = h.counts
    trace = {name: stream_entropy(cfg.seed, name) for name in ("expander", "vdelta", "edges", "resparsify")}
    if n < 2:
        empty = StaticGraph(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
        return SparsifierOutput(empty, empty, h.counts - start, np.zeros(0, dtype=np.int64), 0, cfg,
                                seed_trace=trace)
    expander, v_delta, tg = build_overlay(h, cfg)
    q = cfg.sample_count(n)
    H = sparsify(DegreeSampler(tg), q, stream(cfg.seed, "edges"), n)
    Hbar = H
    if cfg.resparsify:
        Hbar = resparsify(H, cfg.epsilon, stream(cfg.seed, "resparsify"), constant=cfg.resparsify_constant)
    counts = h.counts - start
    log.debug("sparsified n=%d q=%d edges %d -> %d, %d queries", n, q, H.m, Hbar.m, counts.total)
    return SparsifierOutput(Hbar, H, counts, v_delta, q, cfg, expander, Hbar is not H, trace)
