"""Lower-bound instances: the four-block gadget, its unions, and the binomial checks behind them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .graph import StaticGraph, cut_value, store_edge_list
from .oracle import OracleHandle
from .rng import stream
from .sparsifier import PreconditionError

# partner block for (own block, H value); blocks 0..3 are V1..V4
_PARTNER = np.array([[2, 1], [3, 0], [0, 3], [1, 2]])
# own block is the row index of H for V1 and V4, the column index for V2 and V3
_ROW_SIDE = np.array([True, False, False, True])


def draw_h(k: int, p: float, rng) -> np.ndarray:
    return (rng.random((k, k)) < p).astype(np.int8)


class GadgetBackend:
    """Oracle answers for the four-block gadget, optionally with cliques inside blocks.

    Slot ``r < k`` of a vertex is its partner with index ``r`` in the opposite
    layer, so each such answer exposes exactly one entry of ``H``. Slots
    ``k..2k-2`` (clique mode) list the other members of the same block.
    """

    kind = "gadget"

    def __init__(self, H: np.ndarray, cliques: bool = False):
        self.H = np.asarray(H, dtype=np.int8)
        self.k = self.H.shape[0]
        self.cliques = cliques
        self.n = 4 * self.k
        self._deg = 2 * self.k - 1 if cliques else self.k

    def degree_array(self, vs):
        return np.full(np.shape(vs), self._deg, dtype=np.int64)

    def neighbor_array(self, vs, slots):
        vs, slots = np.broadcast_arrays(np.asarray(vs, dtype=np.int64), np.asarray(slots, dtype=np.int64))
        k = self.k
        b, i = np.divmod(vs, k)
        out = np.empty(vs.shape, dtype=np.int64)
        cross = slots < k
        r = np.where(cross, slots, 0)
        row = _ROW_SIDE[b]
        h = np.where(row, self.H[i, r], self.H[r, i])
        out[cross] = (_PARTNER[b, h] * k + r)[cross]
        c = slots - k
        mate = c + (c >= i)
        out[~cross] = (b * k + mate)[~cross]
        return out

    def materialize(self) -> StaticGraph:
        return gadget_graph(self.H, cliques=self.cliques)


def gadget_graph(H: np.ndarray, cliques: bool = False, clique_density: float = 1.0, rng=None) -> StaticGraph:
    k = H.shape[0]
    i, j = np.nonzero(H == 1)
    i0, j0 = np.nonzero(H == 0)
    parts = [np.column_stack([i, k + j]), np.column_stack([2 * k + j, 3 * k + i]),
             np.column_stack([i0, 2 * k + j0]), np.column_stack([k + j0, 3 * k + i0])]
    if cliques:
        a, c = np.triu_indices(k, 1)
        if clique_density < 1.0:
            for blk in range(4):
                keep = rng.random(len(a)) < clique_density
                parts.append(np.column_stack([blk * k + a[keep], blk * k + c[keep]]))
        else:
            parts += [np.column_stack([blk * k + a, blk * k + c]) for blk in range(4)]
    return StaticGraph.from_edges(4 * k, np.concatenate(parts), merge=False)


@dataclass
class GadgetGkp:
    k: int
    p: float
    H: np.ndarray
    graph: StaticGraph
    S: np.ndarray
    seed: int

    @property
    def blocks(self) -> list[np.ndarray]:
        return [np.arange(b * self.k, (b + 1) * self.k) for b in range(4)]

    def planted_cut(self) -> int:
        return int(2 * self.H.sum())

    def handle(self) -> OracleHandle:
        return OracleHandle(GadgetBackend(self.H))

    def check(self) -> list[str]:
        """Invariant violations, empty when the gadget is well formed."""
        k, g = self.k, self.graph
        bad = []
        if g.n != 4 * k:
            bad.append(f"vertex count {g.n} != {4 * k}")
        if g.m != 2 * k * k:
            bad.append(f"edge count {g.m} != {2 * k * k}")
        if not np.all(g.degrees == k):
            bad.append("not k-regular")
        if g != gadget_graph(self.H):
            bad.append("edges do not match H")
        if cut_value(g, self.S) != 2 * self.H.sum():
            bad.append("Cut(S) != 2 sum(H)")
        return bad

    def save(self, prefix) -> tuple[Path, Path]:
        """Write ``<prefix>.edges`` and a ``<prefix>.json`` sidecar with blocks, S and H."""
        prefix = Path(prefix)
        edges, meta = prefix.with_suffix(".edges"), prefix.with_suffix(".json")
        store_edge_list(self.graph, edges)
        doc = {"k": self.k, "p": self.p, "seed": self.seed,
               "blocks": [[int(x) for x in blk] for blk in self.blocks],
               "S": [int(x) for x in self.S], "H": self.H.tolist(), "cut_S": self.planted_cut()}
        meta.write_text(json.dumps(doc, sort_keys=True) + "\n")
        return edges, meta


def build_gkp(k: int, p: float, seed: int = 0, *, fill: int | None = None, copy: int | None = None) -> GadgetGkp:
    """Random four-block gadget with ``H_ij ~ Bernoulli(p)``.

    ``fill`` forces every entry of ``H`` to 0 or 1 regardless of ``p``.
    """
    k = int(k)
    if k <= 3:
        raise PreconditionError(f"gadget needs k > 3, got {k}")
    if fill is not None:
        if fill not in (0, 1):
            raise ValueError("fill must be 0 or 1")
        H = np.full((k, k), fill, dtype=np.int8)
    else:
        if not 0 < p <= 0.25:
            raise PreconditionError(f"gadget needs 0 < p <= 1/4, got {p}")
        extra = () if copy is None else (copy,)
        H = draw_h(k, p, stream(seed, "gadget", *extra))
    S = np.concatenate([np.arange(k), np.arange(2 * k, 3 * k)])
    return GadgetGkp(k, p, H, gadget_graph(H), S, seed)


# -- estimator deviation -----------------------------------------------------------

def deviation_threshold(k: int, p: float) -> float:
    return k * math.sqrt(p / 8)


def exact_deviation_probability(k: int, p: float, revealed: int) -> float:
    """P(|C - Cut(S)| >= k sqrt(p/8)) when ``revealed`` entries of H are known.

    The error is ``2 (B - p m)`` with ``B ~ Bin(m, p)`` over the ``m`` hidden entries.
    """
    m = k * k - revealed
    if m == 0:
        return 0.0
    x = np.arange(m + 1)
    pmf = np.exp(binom_logpmf(x, m, p))
    return float(pmf[np.abs(2 * (x - p * m)) >= deviation_threshold(k, p) - 1e-12].sum())


@dataclass
class DeviationResult:
    k: int
    p: float
    budget: int
    trials: int
    threshold: float
    frequency: float
    exact: float
    mc_sigma: float
    edge_queries_per_trial: int
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if not self.records:
            d.pop("records")
        return d


def estimator_deviation_experiment(k: int, p: float, budget: int, trials: int = 10_000, seed: int = 0, *,
                                   enforce_cap: bool = True, keep_records: bool = False) -> DeviationResult:
    """Monte-Carlo frequency with which the conditional-mean estimator misses Cut(S).

    Each trial draws a gadget and reads ``budget`` uniformly chosen distinct
    entries of ``H`` through the edge oracle (slot ``j`` of vertex ``i`` in
    V1). The estimate is ``2 (sum revealed + p * hidden)``.
    """
    if enforce_cap and budget > k * k / 2:
        raise PreconditionError(f"budget {budget} exceeds k^2/2 = {k * k / 2}")
    if not 0 <= budget <= k * k:
        raise ValueError("budget must lie in [0, k^2]")
    rng = stream(seed, "experiment", k, budget)
    thr = deviation_threshold(k, p)
    hits = 0
    records = []
    queries = 0
    for trial in range(trials):
        H = draw_h(k, p, rng)
        h = OracleHandle(GadgetBackend(H))
        cells = rng.choice(k * k, size=budget, replace=False)
        i, j = np.divmod(cells, k)
        answers = h.neighbors(i, j + 1)
        seen = int(np.count_nonzero(answers < 2 * k))
        C = 2 * (seen + p * (k * k - budget))
        cut = 2 * int(H.sum())
        dev = abs(C - cut) >= thr - 1e-12
        hits += dev
        queries = h.counts.edge
        if keep_records:
            records.append({"trial": trial, "estimate": C, "cut": cut, "deviates": bool(dev)})
    freq = hits / trials
    exact = exact_deviation_probability(k, p, budget)
    sigma = math.sqrt(exact * (1 - exact) / trials)
    return DeviationResult(k, p, budget, trials, thr, freq, exact, sigma, queries, records)


# -- union instances -----------------------------------------------------------

def _round_block(x: float) -> int:
    return max(4, int(round(x / 4)) * 4)


@dataclass
class UnionInstance:
    graph: StaticGraph
    cuts: list
    k: int
    p: float
    copies: int
    case: str

    @property
    def expected_edges(self) -> int:
        return 2 * self.k * self.k * self.copies


def build_hidden_cut_union(n: int, epsilon: float, delta: float, seed: int = 0) -> UnionInstance:
    """Disjoint copies of the gadget sized to hide cut values at the (epsilon, delta) scale.

    When ``delta < epsilon^2`` the block size is ``10/delta`` with ``p = delta^2``,
    otherwise ``10/epsilon^2`` with ``p = epsilon^2``. Block sizes round to a
    multiple of 4 and the copy count is ``ceil(n / 4k)`` so the union has
    between ``n`` and ``2n`` vertices.
    """
    if epsilon <= 0 or delta <= 0:
        raise PreconditionError("epsilon and delta must be positive")
    if delta < epsilon ** 2:
        case, raw, p = "delta", 10 / delta, delta ** 2
    else:
        case, raw, p = "epsilon", 10 / epsilon ** 2, epsilon ** 2
    if p > 0.25:
        raise PreconditionError(f"gadget probability {p:.4g} exceeds 1/4; need min(delta, epsilon^2) <= 1/4")
    k = _round_block(raw)
    copies = math.ceil(n / (4 * k))
    total = 4 * k * copies
    if total > 2 * n:
        raise PreconditionError(f"one copy has {4 * k} vertices, more than 2n = {2 * n}; "
                                f"use n >= {2 * k} or a larger {case}")
    parts, cuts = [], []
    for c in range(copies):
        gad = build_gkp(k, p, seed, copy=c)
        u, v, _ = gad.graph.edges()
        off = 4 * k * c
        parts.append(np.column_stack([u + off, v + off]))
        cuts.append(gad.S + off)
    g = StaticGraph.from_edges(total, np.concatenate(parts), merge=False)
    return UnionInstance(g, cuts, k, p, copies, case)


@dataclass
class CliqueGadgetInstance:
    graph: StaticGraph
    H: np.ndarray
    k: int
    p: float
    epsilon: float

    @property
    def S(self) -> np.ndarray:
        return np.concatenate([np.arange(self.k), np.arange(2 * self.k, 3 * self.k)])

    def planted_ratio(self) -> float:
        return 2 * float(self.H.sum()) / (2 * self.k)


def _crossing_p(k: int, epsilon: float) -> float:
    if k <= 3:
        raise PreconditionError(f"block size must exceed 3, got {k}")
    p = epsilon / k
    if not 0 <= p <= 0.25:
        raise PreconditionError(f"epsilon/k = {p:.4g} must lie in [0, 1/4]")
    return p


def build_clique_gadget(k: int, epsilon: float, seed: int = 0, *, clique_density: float = 1.0) -> CliqueGadgetInstance:
    """Gadget with crossing probability ``epsilon/k`` and cliques inside each block.

    ``k`` is the block size, so the graph has ``4k`` vertices. ``epsilon = 0``
    gives the control graph with no edge leaving ``V1 + V3``.
    """
    p = _crossing_p(k, epsilon)
    rng = stream(seed, "gadget")
    H = draw_h(k, p, rng)
    g = gadget_graph(H, cliques=True, clique_density=clique_density, rng=rng)
    return CliqueGadgetInstance(g, H, k, p, epsilon)


def distinguishing_query_experiment(k: int, epsilon: float, trials: int = 200, seed: int = 0, *,
                                    probe_limit: int | None = None, batch: int = 4096) -> dict:
    """Uniform edge probing until an edge leaves ``V1 + V3``.

    Each probe picks a uniform vertex and a uniform neighbor slot. Probes are
    issued in batches and the count stops at the first crossing answer.
    Trials that reach ``probe_limit`` are reported as censored.
    """
    p = _crossing_p(k, epsilon)
    limit = probe_limit or 1000 * k * max(1, math.ceil(1 / max(epsilon, 1e-9)))
    rng = stream(seed, "experiment", k)
    side = np.isin(np.arange(4 * k) // k, (0, 2))
    deg = 2 * k - 1
    probes = []
    censored = 0
    for _ in range(trials):
        H = draw_h(k, p, rng)
        h = OracleHandle(GadgetBackend(H, cliques=True))
        used, found = 0, False
        while used < limit:
            b = min(batch, limit - used)
            vs = rng.integers(0, 4 * k, size=b)
            slots = rng.integers(1, deg + 1, size=b)
            ws = h.neighbors(vs, slots)
            hit = np.flatnonzero(side[vs] != side[ws])
            if hit.size:
                used += int(hit[0]) + 1
                found = True
                break
            used += b
        censored += not found
        probes.append(used)
    probes = np.array(probes)
    return {"k": k, "epsilon": epsilon, "p": p, "trials": trials, "probe_limit": limit,
            "censored": censored, "median": float(np.median(probes)), "mean": float(probes.mean()),
            "probes": probes.tolist()}


def scaling_slope(results: list[dict]) -> float:
    """Least-squares slope of log(median probes) against log(epsilon)."""
    x = np.log([r["epsilon"] for r in results])
    y = np.log([r["median"] for r in results])
    return float(np.polyfit(x, y, 1)[0])


# -- binomial anti-concentration ---------------------------------------------------------

def binom_logpmf(x, n: int, p: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if p == 0:
        return np.where(x == 0, 0.0, -np.inf)
    return gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1) + x * math.log(p) + (n - x) * math.log1p(-p)


def binomial_anticoncentration(p: float, n: int, threshold: float | None = None) -> dict:
    """Exact ``min_theta P(|X - theta| >= t)`` for ``X ~ Bin(n, p)``, default ``t = sqrt(pn)/2``.

    The minimum over real ``theta`` equals one minus the heaviest run of
    ``ceil(2t)`` consecutive atoms (an open interval of length ``2t`` holds at
    most that many integers and some placement holds each such run). Integer
    ``theta`` in ``[0, n]`` are scanned separately and the value at
    ``theta = pn`` is reported too.
    """
    if not 0 < p <= 0.25:
        raise PreconditionError(f"need 0 < p <= 1/4, got {p}")
    if p * n < 36:
        raise PreconditionError(f"need pn >= 36, got {p * n:.4g}")
    t = 0.5 * math.sqrt(p * n) if threshold is None else float(threshold)
    x = np.arange(n + 1)
    pmf = np.exp(binom_logpmf(x, n, p))
    csum = np.concatenate([[0.0], np.cumsum(pmf)])
    total = csum[-1]

    w = max(1, math.ceil(2 * t))
    w = min(w, n + 1)
    windows = csum[w:] - csum[:-w]
    a = int(np.argmax(windows))
    real_min = max(0.0, total - windows[a])

    # integer theta: atoms with |x - theta| < t
    r = math.ceil(t) - 1
    thetas = np.arange(n + 1)
    lo = np.clip(thetas - r, 0, n + 1)
    hi = np.clip(thetas + r + 1, 0, n + 1)
    inner = csum[hi] - csum[lo]
    int_probs = np.maximum(total - inner, 0.0)
    ti = int(np.argmin(int_probs))

    mu = p * n
    at_mean = float(pmf[np.abs(x - mu) >= t].sum())
    return {"p": p, "n": n, "threshold": t, "min_probability": float(real_min),
            "window_start": a, "window_width": w,
            "min_probability_integer_theta": float(int_probs[ti]), "argmin_integer_theta": ti,
            "at_mean": at_mean, "passed": bool(real_min >= 0.01)}
