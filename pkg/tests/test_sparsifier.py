import math
import warnings

import numpy as np
import pytest

from subspar.generators import complete_graph, gnp, star_graph
from subspar.graph import StaticGraph
from subspar.oracle import OracleError, OracleHandle, implicit_backend
from subspar.sparsifier import (DegreeSampler, PreconditionError, ResparsifyWarning, SamplingError, SparsifyConfig,
                                max_delta, pick_v_delta, resparsify, sample_edge, sparsify, sublinear_sparsify)
from subspar.spectral import check_lower_bound, laplacian, quadratic_forms


def exact_p(g):
    d = g.degrees
    u, v, _ = g.edges()
    return {(int(a), int(b)): 1 / (g.n * d[a]) + 1 / (g.n * d[b]) for a, b in zip(u, v)}


def test_config_validation():
    with pytest.raises(PreconditionError):
        SparsifyConfig(epsilon=1.0)
    with pytest.raises(PreconditionError):
        SparsifyConfig(delta=0)
    with pytest.raises(PreconditionError):
        SparsifyConfig(q_multiplier=0)
    with pytest.raises(PreconditionError):
        SparsifyConfig(delta=0.5).validate_for(1000)
    SparsifyConfig(delta=max_delta(1000)).validate_for(1000)


def test_sample_count_formula():
    cfg = SparsifyConfig(epsilon=0.5, delta=0.1, q_multiplier=1.0)
    assert cfg.sample_count(100) == math.ceil(100 * math.log(100) ** 2 / (0.1 * 0.25))
    assert cfg.overlay_size(100) == 10
    assert cfg.overlay_size(15) == 2
    assert cfg.overlay_size(5) == 0


def test_pick_v_delta():
    h = OracleHandle(complete_graph(10))
    assert sorted(pick_v_delta(h, 10, 0)) == list(range(10))
    assert len(pick_v_delta(h, 0, 0)) == 0
    assert h.counts.vertex == 10
    with pytest.raises(OracleError):
        pick_v_delta(h, 11, 0)


def test_pick_v_delta_inclusion_frequency():
    n, size, trials = 50, 5, 10_000
    h = OracleHandle(complete_graph(n))
    rng = np.random.default_rng(0)
    counts = np.zeros(n)
    for _ in range(trials):
        counts[pick_v_delta(h, size, rng)] += 1
    delta = size / n
    assert np.all(np.abs(counts / trials - delta) <= 3 * math.sqrt(delta / trials))


def test_single_edge_probability_one():
    g = StaticGraph.from_edges(2, [(0, 1)])
    (u, v), p = sample_edge(g, 0)
    assert {u, v} == {0, 1} and p == pytest.approx(1.0)


def test_star_probabilities_sum_to_one():
    p = exact_p(star_graph(3))
    assert all(val == pytest.approx(1 / 3) for val in p.values())
    assert sum(p.values()) == pytest.approx(1.0)
    sampler = DegreeSampler(star_graph(3))
    _, _, ps = sampler(100, np.random.default_rng(0))
    assert np.allclose(ps, 1 / 3)


def test_edge_frequencies_match_p():
    g = gnp(50, 0.2, np.random.default_rng(1))
    p = exact_p(g)
    draws = 1_000_000
    u, v, ps = DegreeSampler(g)(draws, np.random.default_rng(2))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys, counts = np.unique(lo * g.n + hi, return_counts=True)
    freq = dict(zip(keys.tolist(), counts.tolist()))
    for (a, b), pe in p.items():
        sigma = math.sqrt(pe * (1 - pe) / draws)
        assert abs(freq.get(a * g.n + b, 0) / draws - pe) <= 4 * sigma + 1e-12
    reported = dict(zip((lo * g.n + hi).tolist(), ps.tolist()))
    for (a, b), pe in p.items():
        if a * g.n + b in reported:
            assert reported[a * g.n + b] == pytest.approx(pe)


def test_isolated_vertices_are_redrawn():
    g = StaticGraph.from_edges(5, [(0, 1)])
    u, v, _ = DegreeSampler(g)(50, np.random.default_rng(0))
    assert set(u) | set(v) <= {0, 1}
    with pytest.raises(SamplingError):
        DegreeSampler(StaticGraph.from_edges(4, np.zeros((0, 2))))(5, np.random.default_rng(0))


def test_sparsify_single_edge_exact():
    g = StaticGraph.from_edges(2, [(0, 1)])
    for q in (1, 7, 100):
        H = sparsify(DegreeSampler(g), q, 0)
        assert H.edge_dict() == pytest.approx({(0, 1): 1.0})


def test_sparsify_q1():
    g = gnp(20, 0.5, np.random.default_rng(0))
    H = sparsify(DegreeSampler(g), 1, 0)
    (e, w), = H.edge_dict().items()
    assert w == pytest.approx(1 / exact_p(g)[e])


def test_sparsify_unbiased_k8():
    g = complete_graph(8)
    rng = np.random.default_rng(3)
    X = rng.standard_normal((20, 8))
    truth = quadratic_forms(g, X)
    runs = np.array([quadratic_forms(sparsify(DegreeSampler(g), 100_000, rng), X) for _ in range(50)])
    mean, std = runs.mean(axis=0), runs.std(axis=0, ddof=1)
    assert np.all(np.abs(mean - truth) / truth <= 0.02)
    assert np.all(np.abs(mean - truth) <= 3 * std / math.sqrt(50) + 1e-12)


def test_resparsify_noop_below_target():
    g = complete_graph(10)
    assert resparsify(g, 0.5, 0) is g


def test_resparsify_reduces_and_stays_spectral():
    g = complete_graph(120)
    H = resparsify(g, 0.5, np.random.default_rng(0), constant=1.0)
    assert H.m <= 1.0 * 120 * math.log(120) / 0.25
    assert H.m < g.m
    assert check_lower_bound(g, H, 0.5).passed
    H2 = resparsify(H, 0.5, np.random.default_rng(1), constant=0.5)
    assert H2.m < H.m
    # errors compose: (1 - eps)^2 = 1 - 0.75
    assert check_lower_bound(g, H2, 0.75).passed


def test_resparsify_disconnected_warns():
    a = complete_graph(60)
    u, v, _ = a.edges()
    g = StaticGraph.from_edges(120, np.vstack([np.column_stack([u, v]), np.column_stack([u + 60, v + 60])]))
    with pytest.warns(ResparsifyWarning):
        out = resparsify(g, 0.9, 0, constant=0.1)
    assert out is g


def test_pipeline_single_edge():
    out = sublinear_sparsify(OracleHandle(StaticGraph.from_edges(2, [(0, 1)])), SparsifyConfig(delta=0.1))
    assert out.graph.edge_dict() == pytest.approx({(0, 1): 1.0})


def test_pipeline_delta_too_large():
    with pytest.raises(PreconditionError):
        sublinear_sparsify(implicit_backend("complete", {"n": 1000}), SparsifyConfig(delta=0.5))


def test_pipeline_deterministic():
    g = gnp(80, 0.3, np.random.default_rng(0))
    cfg = SparsifyConfig(delta=0.15, seed=4)
    a = sublinear_sparsify(OracleHandle(g), cfg)
    b = sublinear_sparsify(OracleHandle(g), cfg)
    assert a.graph.fingerprint() == b.graph.fingerprint()
    assert a.to_report() == b.to_report()
    c = sublinear_sparsify(OracleHandle(g), SparsifyConfig(delta=0.15, seed=5))
    assert c.graph.fingerprint() != a.graph.fingerprint()


def test_pipeline_query_accounting():
    h = implicit_backend("complete", {"n": 300})
    cfg = SparsifyConfig(delta=0.1)
    out = sublinear_sparsify(h, cfg)
    q = cfg.sample_count(300)
    assert out.q == q
    assert out.query_report.edge <= q
    assert out.query_report.vertex == q + cfg.overlay_size(300)
    assert out.query_report.degree <= 300
    assert out.query_report.total <= 3 * q + 300


def test_pipeline_weights_positive_and_budget():
    g = gnp(150, 0.5, np.random.default_rng(2))
    out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(delta=max_delta(150)))
    assert np.all(out.graph.data > 0)
    assert out.graph.m <= out.config.edge_target(150)
    assert out.graph.m <= out.intermediate_edges


def test_pipeline_lower_bound_n200():
    passed = 0
    g = gnp(200, 0.5, np.random.default_rng(7))
    for seed in range(10):
        out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(delta=0.15, seed=seed))
        passed += check_lower_bound(g, out.graph, 0.5).passed
    assert passed >= 9


def test_resparsify_off_keeps_intermediate():
    g = gnp(60, 0.5, np.random.default_rng(2))
    out = sublinear_sparsify(OracleHandle(g), SparsifyConfig(delta=0.2, resparsify=False))
    assert out.graph is out.intermediate and not out.resparsified
    assert out.graph.m <= out.q
