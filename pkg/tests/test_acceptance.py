"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import time

import numpy as np
import pytest

from subspar.cli import main as cli_main
from subspar.cuts import brute_force_sparsest_cut, max_flow_exact, min_st_cut_approx, sparsest_cut_driver
from subspar.generators import gnp, two_cliques_bridge
from subspar.graph import StaticGraph, cut_values, store_edge_list
from subspar.hardness import (binomial_anticoncentration, distinguishing_query_experiment,
                              estimator_deviation_experiment, scaling_slope)
from subspar.oracle import OracleHandle, implicit_backend
from subspar.sparsifier import SparsifyConfig, build_overlay, max_delta, sublinear_sparsify
from subspar.spectral import check_lower_bound, check_upper_bound, verify_resistance_sandwich

# pinned tolerances
EPS = 0.5
EDGE_CONSTANT = 8.0                  # |E(H)| <= 8 n ln n / eps^2
EDGE_RUNTIME_S = 60.0
QUERY_SIZES = (500, 1000, 2000, 4000)
QUERY_DELTA = 0.1
QUERY_C_SPREAD = 1.25                # all per-n constants within a factor of the fitted C
QUERY_RUNTIME_S = 120.0
PSD_RTOL = 1e-9
LOWER_SEEDS, LOWER_MIN_PASS, LOWER_N, LOWER_RUNTIME_S = 50, 45, 200, 300.0
UPPER_SEEDS, UPPER_MIN_PASS, UPPER_N, UPPER_C_MAX, UPPER_RANDOM = 50, 45, 12, 16.0, 100
RES_N, RES_DELTA, RES_C_MAX, FOSTER_RTOL = 300, 0.1, 64.0, 1e-6
DRIVER_SIZES, DRIVER_FACTOR, DRIVER_ALPHA = (12, 16, 20), 6.0, 2.0
ST_N, ST_P, ST_EPS, ST_C, ST_SEEDS, ST_MIN_PASS = 100, 0.4, 0.3, 4.0, 50, 45
ST_EXHAUSTIVE_N = 16
GADGET_K, GADGET_P, GADGET_TRIALS, GADGET_MIN_FREQ, MC_SIGMAS = 40, 1 / 16, 10_000, 0.01, 3.0
BINOM_MIN, BINOM_RUNTIME_S = 0.01, 10.0
PROBE_K, PROBE_EPS, PROBE_TRIALS, SLOPE, SLOPE_TOL = 50, (0.25, 0.5, 1.0, 2.0), 200, -1.0, 0.2

RESULTS = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_c01_edge_budget():
    worst, slow = 0.0, 0.0
    ok = True
    for n in (100, 200, 400):
        g = gnp(n, 0.5, np.random.default_rng(n))
        t = time.perf_counter()
        out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(epsilon=EPS, delta=max_delta(n), seed=1))
        slow = max(slow, time.perf_counter() - t)
        bound = EDGE_CONSTANT * n * math.log(n) / EPS ** 2
        worst = max(worst, out.graph.m / bound)
        ok &= out.graph.m <= bound
    ok &= slow < EDGE_RUNTIME_S
    record("1 edge budget", ok, f"max |E|/bound = {worst:.3f}, slowest run {slow:.1f}s")


def test_c02_query_sublinearity():
    t = time.perf_counter()
    rows = []
    for n in QUERY_SIZES:
        out = sublinear_sparsify(implicit_backend("complete", {"n": n}),
                                 SparsifyConfig(epsilon=EPS, delta=QUERY_DELTA, seed=2))
        total = out.query_report.total
        rows.append((n, total, total / (n * (n - 1) / 2), total / (n * math.log(n) ** 2 / (QUERY_DELTA * EPS ** 2))))
    elapsed = time.perf_counter() - t
    C = max(r[3] for r in rows)
    within = all(r[3] >= C / QUERY_C_SPREAD for r in rows)
    decreasing = all(a[2] > b[2] for a, b in zip(rows, rows[1:]))
    ok = within and decreasing and elapsed < QUERY_RUNTIME_S
    ratios = ", ".join(f"{r[2]:.3f}" for r in rows)
    record("2 query sublinearity", ok, f"fitted C = {C:.4f}, queries/m = [{ratios}], {elapsed:.1f}s")


def test_c03_lower_bound():
    t = time.perf_counter()
    passed = 0
    for seed in range(LOWER_SEEDS):
        g = gnp(LOWER_N, 0.5, np.random.default_rng(1000 + seed))
        out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(epsilon=EPS, delta=max_delta(LOWER_N), seed=seed))
        passed += check_lower_bound(g, out.graph, EPS, rtol=PSD_RTOL).passed
    elapsed = time.perf_counter() - t
    ok = passed >= LOWER_MIN_PASS and elapsed < LOWER_RUNTIME_S
    record("3 lower bound", ok, f"{passed}/{LOWER_SEEDS} seeds, {elapsed:.1f}s")


def test_c04_upper_bound():
    passed, cs = 0, []
    delta = max_delta(UPPER_N)
    for seed in range(UPPER_SEEDS):
        g = gnp(UPPER_N, 0.5, np.random.default_rng(2000 + seed))
        out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(epsilon=EPS, delta=delta, seed=seed))
        rep = check_upper_bound(g, out.graph, EPS, delta, n_random=UPPER_RANDOM, c_max=UPPER_C_MAX, seed=seed)
        assert rep.mode == "exhaustive" and rep.trials == UPPER_RANDOM + 2 ** UPPER_N - 1
        passed += rep.passed
        cs.append(rep.slack["fitted_c"])
    ok = passed >= UPPER_MIN_PASS
    record("4 upper bound", ok, f"{passed}/{UPPER_SEEDS} seeds with c <= {UPPER_C_MAX:g}, median c {np.median(cs):.2f}")


def test_c05_resistance_sandwich():
    g = gnp(RES_N, 0.5, np.random.default_rng(5))
    cfg = SparsifyConfig(epsilon=EPS, delta=RES_DELTA, seed=5)
    _, _, tg = build_overlay(OracleHandle(g), cfg)
    rep = verify_resistance_sandwich(tg.materialize(), RES_DELTA, c_max=RES_C_MAX, method="pinv")
    s = rep.slack
    ok = rep.passed and s["lower_violations"] == 0 and s["foster_target"] == RES_N - 1 \
        and s["foster_rel_error"] <= FOSTER_RTOL
    record("5 resistance sandwich", ok,
           f"fitted C = {s['fitted_C']:.4f}, min R/lower = {s['min_lower_ratio']:.3f}, "
           f"Foster rel err = {s['foster_rel_error']:.1e}")


def test_c06_sparsest_cut_driver():
    ok, parts = True, []
    for n in DRIVER_SIZES:
        g = two_cliques_bridge(n)
        res = sparsest_cut_driver(OracleHandle(g), alpha_estimate=DRIVER_ALPHA, cfg=SparsifyConfig(seed=n))
        _, opt = brute_force_sparsest_cut(g)
        alpha = res.info["alpha_measured"]
        bound_it = math.ceil(math.log2(n)) + 2
        ok &= res.ratio <= DRIVER_FACTOR * alpha * opt + 1e-12 and res.iterations <= bound_it and res.certified
        parts.append(f"n={n}: ratio {res.ratio:.3f} vs opt {opt:.3f}, alpha {alpha:.2f}, "
                     f"{res.iterations}/{bound_it} rounds")
    record("6 sparsest-cut driver", ok, "; ".join(parts))


def _exhaustive_st(g, s, t):
    others = [v for v in range(g.n) if v not in (s, t)]
    codes = np.arange(1 << len(others), dtype=np.int64)
    masks = np.zeros((len(codes), g.n), dtype=bool)
    masks[:, s] = True
    for j, v in enumerate(others):
        masks[:, v] = (codes >> j) & 1
    return cut_values(g, masks).min()


def test_c07_min_st_cut():
    passed = 0
    for seed in range(ST_SEEDS):
        g = gnp(ST_N, ST_P, np.random.default_rng(3000 + seed))
        exact, _ = max_flow_exact(g, 0, 1)
        res = min_st_cut_approx(OracleHandle(g), 0, 1, ST_EPS, SparsifyConfig(seed=seed))
        passed += res.value <= exact + ST_C * ST_EPS * ST_N
    rng = np.random.default_rng(7)
    duality = 0
    for n in range(10, ST_EXHAUSTIVE_N + 1):
        base = gnp(n, 0.4, rng)
        u, v, _ = base.edges()
        g = StaticGraph.from_edges(n, np.column_stack([u, v]), rng.integers(1, 6, len(u)))
        flow, S = max_flow_exact(g, 0, n - 1)
        duality += flow == _exhaustive_st(g, 0, n - 1) == cut_values(g, np.isin(np.arange(n), S)[None])[0]
    checked = ST_EXHAUSTIVE_N - 9
    ok = passed >= ST_MIN_PASS and duality == checked
    record("7 min s-t cut", ok, f"{passed}/{ST_SEEDS} seeds within exact + {ST_C:g} eps n; "
                                f"max-flow = exhaustive min cut on {duality}/{checked} graphs (n <= {ST_EXHAUSTIVE_N})")


def test_c08_gadget_experiment():
    cap = estimator_deviation_experiment(GADGET_K, GADGET_P, GADGET_K ** 2 // 2, GADGET_TRIALS, seed=8)
    blind = estimator_deviation_experiment(GADGET_K, GADGET_P, 0, GADGET_TRIALS, seed=8)
    sigma = math.sqrt(blind.exact * (1 - blind.exact) / GADGET_TRIALS)
    ok = cap.frequency >= GADGET_MIN_FREQ and abs(blind.frequency - blind.exact) <= MC_SIGMAS * sigma
    record("8 gadget estimator", ok,
           f"budget k^2/2 frequency {cap.frequency:.4f}; budget 0 frequency {blind.frequency:.4f} "
           f"vs exact {blind.exact:.4f} (sigma {sigma:.4f})")


def binom_grid():
    return [(p, n) for p in (0.25, 0.2, 0.1, 0.05) for n in (
        math.ceil(36 / p), math.ceil(50 / p), math.ceil(100 / p), math.ceil(400 / p), math.ceil(1000 / p))]


def test_c09_binomial_anticoncentration():
    t = time.perf_counter()
    grid = binom_grid()
    assert len(grid) == 20 and all(p <= 0.25 and p * n >= 36 for p, n in grid)
    worst = min(binomial_anticoncentration(p, n)["min_probability"] for p, n in grid)
    elapsed = time.perf_counter() - t
    ok = worst >= BINOM_MIN and elapsed < BINOM_RUNTIME_S
    record("9 binomial anti-concentration", ok, f"minimum over 20 grid points {worst:.4f}, {elapsed:.2f}s")


def test_c10_probe_scaling():
    results = [distinguishing_query_experiment(PROBE_K, e, PROBE_TRIALS, seed=10) for e in PROBE_EPS]
    slope = scaling_slope(results)
    censored = sum(r["censored"] for r in results)
    ok = abs(slope - SLOPE) <= SLOPE_TOL and censored == 0
    medians = ", ".join(f"{r['median']:.0f}" for r in results)
    record("10 distinguishing probes", ok, f"log-log slope {slope:.3f}, medians [{medians}]")


def test_c11_determinism(tmp_path):
    g = gnp(20, 0.5, np.random.default_rng(11))
    gp = tmp_path / "g.edges"
    store_edge_list(g, gp)
    runs = {
        "sparsify": ["sparsify", str(gp), "--seed", "4"],
        "sparsify-implicit": ["sparsify", "--implicit", "complete:300", "--delta", "0.1", "--seed", "4"],
        "verify": ["verify", str(gp), str(gp)],
        "sparsest-cut": ["sparsest-cut", str(gp), "--alpha", "2"],
        "min-st-cut": ["min-st-cut", str(gp), "--s", "0", "--t", "5"],
        "gadget": ["gadget", "--k", "10", "--p", "0.25", "--seed", "1"],
        "binom": ["binom", "--p", "0.25", "--n", "144"],
        "bench-queries": ["bench-queries", "--sizes", "200,400"],
    }
    same = 0
    for name, argv in runs.items():
        out = tmp_path / name
        assert cli_main(argv + ["--out", str(out)]) == 0
        code = cli_main(["replay", str(out / "manifest.json")])
        first = json.loads((out / "manifest.json").read_text())["outputs"]
        again = json.loads((out / "replay" / "manifest.json").read_text())["outputs"]
        same += code == 0 and first == again
    record("11 determinism", same == len(runs), f"{same}/{len(runs)} commands replay byte-identical outputs")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
