import json
import math

import numpy as np
import pytest
from scipy.stats import binom

from subspar.cuts import brute_force_sparsest_cut
from subspar.graph import cut_value, load_edge_list
from subspar.hardness import (GadgetBackend, binomial_anticoncentration, build_gkp, build_hidden_cut_union,
                              build_clique_gadget, distinguishing_query_experiment, draw_h,
                              estimator_deviation_experiment, exact_deviation_probability, gadget_graph,
                              scaling_slope)
from subspar.oracle import OracleHandle
from subspar.sparsifier import PreconditionError


@pytest.mark.parametrize("k,p,seed", [(4, 0.25, 0), (10, 0.25, 1), (17, 0.1, 2), (30, 0.05, 3)])
def test_gadget_invariants(k, p, seed):
    gad = build_gkp(k, p, seed)
    assert gad.check() == []
    assert cut_value(gad.graph, gad.S) == 2 * gad.H.sum()


def test_gadget_fill_overrides():
    full = build_gkp(6, 0.2, fill=1)
    assert full.planted_cut() == 2 * 36 and cut_value(full.graph, full.S) == 72
    empty = build_gkp(6, 0.2, fill=0)
    assert cut_value(empty.graph, empty.S) == 0 and not empty.graph.is_connected()


def test_gadget_ranges():
    with pytest.raises(PreconditionError):
        build_gkp(3, 0.2)
    with pytest.raises(PreconditionError):
        build_gkp(10, 0.3)
    with pytest.raises(PreconditionError):
        build_gkp(10, 0.0)


def test_gadget_deterministic():
    assert np.array_equal(build_gkp(10, 0.25, 9).H, build_gkp(10, 0.25, 9).H)


def test_gadget_degree_oracle_uninformative():
    gad = build_gkp(12, 0.2, 0)
    h = gad.handle()
    assert set(h.degrees(np.arange(48)).tolist()) == {12}


def test_gadget_each_query_reveals_one_entry():
    gad = build_gkp(8, 0.25, 4)
    h = gad.handle()
    for i in range(8):
        for j in range(8):
            w = h.neighbor(i, j + 1)
            assert w % 8 == j
            assert (w // 8 == 1) == bool(gad.H[i, j])


@pytest.mark.parametrize("cliques", [False, True])
def test_backend_matches_graph(cliques):
    H = draw_h(6, 0.25, np.random.default_rng(0))
    h = OracleHandle(GadgetBackend(H, cliques))
    g = gadget_graph(H, cliques=cliques)
    for v in range(24):
        got = sorted(h.neighbor(v, i) for i in range(1, h.degree(v) + 1))
        assert got == g.neighbors(v).tolist()


def test_gadget_mean_cut():
    k, p, trials = 10, 0.25, 10_000
    rng = np.random.default_rng(0)
    cuts = np.array([2 * draw_h(k, p, rng).sum() for _ in range(trials)])
    sigma = 2 * math.sqrt(p * (1 - p)) * k / math.sqrt(trials)
    assert abs(cuts.mean() - 2 * p * k * k) <= 3 * sigma


def test_gadget_sidecar(tmp_path):
    gad = build_gkp(5, 0.25, 2)
    edges, meta = gad.save(tmp_path / "gad")
    doc = json.loads(meta.read_text())
    assert doc["S"] == gad.S.tolist() and doc["H"] == gad.H.tolist()
    assert load_edge_list(edges) == gad.graph


def test_deviation_full_budget_is_exact():
    res = estimator_deviation_experiment(10, 0.25, 100, trials=1000, enforce_cap=False)
    assert res.frequency == 0 and res.exact == 0


def test_deviation_cap_enforced():
    with pytest.raises(PreconditionError):
        estimator_deviation_experiment(10, 0.25, 51, trials=10)


def test_deviation_counts_edge_queries():
    res = estimator_deviation_experiment(12, 0.25, 40, trials=20)
    assert res.edge_queries_per_trial == 40


def test_exact_deviation_matches_scipy():
    k, p = 40, 1 / 16
    thr = k * math.sqrt(p / 8)
    m = k * k
    x = np.arange(m + 1)
    ref = binom.pmf(x, m, p)[np.abs(2 * (x - p * m)) >= thr].sum()
    assert exact_deviation_probability(k, p, 0) == pytest.approx(ref, rel=1e-9)


def test_hidden_union_single_copy_is_gadget():
    inst = build_hidden_cut_union(100, 0.9, 0.25, seed=3)
    assert inst.copies == 1
    gad = build_gkp(inst.k, inst.p, 3, copy=0)
    assert inst.graph == gad.graph


def test_hidden_union_counts_and_additive_cuts():
    inst = build_hidden_cut_union(4000, 0.5, 0.1, seed=0)
    assert inst.case == "delta" and inst.k == 100 and inst.p == pytest.approx(0.01)
    assert 4000 <= inst.graph.n <= 8000
    assert inst.graph.m == inst.expected_edges == 2 * 100 ** 2 * inst.copies
    each = [cut_value(inst.graph, S) for S in inst.cuts]
    union = np.concatenate(inst.cuts[:3])
    assert cut_value(inst.graph, union) == sum(each[:3])


def test_hidden_union_epsilon_case():
    inst = build_hidden_cut_union(2000, 0.4, 0.5, seed=0)
    assert inst.case == "epsilon" and inst.k == 64 and inst.p == pytest.approx(0.16)
    assert inst.graph.m == inst.expected_edges


def test_hidden_union_infeasible():
    with pytest.raises(PreconditionError, match="n >="):
        build_hidden_cut_union(100, 0.5, 0.01)


def test_clique_gadget_control_disconnected():
    inst = build_clique_gadget(10, 0.0)
    assert cut_value(inst.graph, inst.S) == 0
    assert len(np.unique(inst.graph.components())) == 2


def test_crossing_planted_ratio():
    inst = build_clique_gadget(50, 2.0, seed=1)
    assert inst.planted_ratio() == pytest.approx(cut_value(inst.graph, inst.S) / (2 * 50))
    assert 0.5 * 2.0 <= inst.planted_ratio() <= 2 * 2.0


def test_clique_gadget_tiny_brute_force():
    inst = build_clique_gadget(5, 1.0, seed=2)
    _, opt = brute_force_sparsest_cut(inst.graph)
    assert opt <= inst.planted_ratio() + 1e-12
    assert inst.planted_ratio() <= 10 * max(opt, 1e-12) or opt == 0


def test_probe_control_and_dense():
    res = distinguishing_query_experiment(10, 0.0, trials=3, probe_limit=500)
    assert res["censored"] == 3 and res["median"] == 500
    res = distinguishing_query_experiment(10, 2.5, trials=50)
    assert res["median"] < 20


def test_binom_examples():
    res = binomial_anticoncentration(0.25, 144)
    assert res["threshold"] == 3 and res["passed"]
    res = binomial_anticoncentration(0.25, 400)
    assert res["min_probability"] >= 0.3
    draws = np.random.default_rng(0).binomial(400, 0.25, 1_000_000)
    mc = np.mean(np.abs(draws - 100) >= res["threshold"])
    assert res["at_mean"] == pytest.approx(mc, abs=5 * math.sqrt(mc * (1 - mc) / 1e6))


def test_binom_real_theta_brute_force():
    p, n = 0.2, 200
    res = binomial_anticoncentration(p, n)
    x = np.arange(n + 1)
    pmf = binom.pmf(x, n, p)
    thetas = np.arange(0, n, 0.01)
    t = res["threshold"]
    vals = [pmf[np.abs(x - th) >= t].sum() for th in thetas[3000:5000]]
    assert res["min_probability"] == pytest.approx(min(vals), abs=1e-9)


def test_binom_minimizer_near_mode():
    grid = [(0.25, 144), (0.25, 400), (0.2, 180), (0.1, 360), (0.1, 1000), (0.05, 720), (0.15, 240), (0.02, 1800),
            (0.25, 1000), (0.12, 500)]
    for p, n in grid:
        res = binomial_anticoncentration(p, n)
        assert abs(res["argmin_integer_theta"] - math.floor(p * n)) <= 1


def test_binom_monotone_in_threshold():
    base = binomial_anticoncentration(0.1, 500)
    bigger = binomial_anticoncentration(0.1, 500, threshold=base["threshold"] + 1)
    assert bigger["min_probability"] <= base["min_probability"]


def test_binom_preconditions():
    with pytest.raises(PreconditionError):
        binomial_anticoncentration(0.25, 100)
    with pytest.raises(PreconditionError):
        binomial_anticoncentration(0.3, 1000)


def test_scaling_slope_fit():
    rows = [{"epsilon": e, "median": 100 / e} for e in (0.25, 0.5, 1, 2)]
    assert scaling_slope(rows) == pytest.approx(-1.0)
