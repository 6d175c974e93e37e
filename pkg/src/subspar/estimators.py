"""Estimator-style wrappers around the sparsifier and the cut drivers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cuts import min_st_cut_approx, sparsest_cut_driver, sweep_cut
from .graph import as_mask
from .sparsifier import SparsifyConfig, max_delta, sublinear_sparsify
from .spectral import check_lower_bound, check_upper_bound
from .validation import check_graph, check_handle, check_vertex


class SublinearSparsifier(TransformerMixin, BaseEstimator):
    """Probabilistic spectral sparsifier fitted through oracle access.

    ``fit`` accepts a graph, an oracle handle or a symmetric adjacency matrix.
    ``transform`` returns the sparsifier's weighted adjacency (CSR).
    ``delta="auto"`` uses ``1 / ln n``.
    """

    def __init__(self, epsilon=0.5, delta="auto", q_multiplier=0.125, expander_mode="random-regular",
                 resparsify=True, random_state=0):
        self.epsilon = epsilon
        self.delta = delta
        self.q_multiplier = q_multiplier
        self.expander_mode = expander_mode
        self.resparsify = resparsify
        self.random_state = random_state

    def _config(self, n):
        delta = max_delta(n) if self.delta == "auto" else float(self.delta)
        return SparsifyConfig(epsilon=self.epsilon, delta=delta, q_multiplier=self.q_multiplier,
                              seed=int(self.random_state or 0), expander_mode=self.expander_mode,
                              resparsify=self.resparsify)

    def fit(self, X, y=None):
        h = check_handle(X)
        self.config_ = self._config(h.n)
        out = sublinear_sparsify(h, self.config_)
        self.output_ = out
        self.sparsifier_ = out.graph
        self.n_vertices_ = h.n
        self.queries_ = out.query_report
        return self

    def transform(self, X):
        check_is_fitted(self, "sparsifier_")
        return self.sparsifier_.adjacency()

    def check(self, X, n_vectors=100):
        """Lower- and upper-bound reports of the fitted sparsifier against ``X``."""
        check_is_fitted(self, "sparsifier_")
        g = check_graph(X)
        eps, delta = self.config_.epsilon, self.config_.delta
        return (check_lower_bound(g, self.sparsifier_, eps),
                check_upper_bound(g, self.sparsifier_, eps, delta, n_random=n_vectors))


class SparsestCut(BaseEstimator):
    """Sparsest cut through the delta-halving driver; ``labels_`` marks the returned side."""

    def __init__(self, alpha_estimate=8.0, subroutine=None, q_multiplier=0.125, random_state=0):
        self.alpha_estimate = alpha_estimate
        self.subroutine = subroutine
        self.q_multiplier = q_multiplier
        self.random_state = random_state

    def fit(self, X, y=None):
        h = check_handle(X)
        cfg = SparsifyConfig(q_multiplier=self.q_multiplier, seed=int(self.random_state or 0))
        self.result_ = sparsest_cut_driver(h, self.subroutine or sweep_cut, self.alpha_estimate, cfg)
        self.labels_ = as_mask(h.n, self.result_.U).astype(np.int64)
        self.ratio_ = self.result_.ratio
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


class MinSTCut(BaseEstimator):
    """Additive-error minimum s-t cut; ``labels_`` is 1 on the source side."""

    def __init__(self, source=0, sink=1, epsilon=0.3, q_multiplier=0.125, random_state=0):
        self.source = source
        self.sink = sink
        self.epsilon = epsilon
        self.q_multiplier = q_multiplier
        self.random_state = random_state

    def fit(self, X, y=None):
        h = check_handle(X)
        s = check_vertex(self.source, h.n, "source")
        t = check_vertex(self.sink, h.n, "sink")
        cfg = SparsifyConfig(q_multiplier=self.q_multiplier, seed=int(self.random_state or 0))
        self.result_ = min_st_cut_approx(h, s, t, self.epsilon, cfg)
        self.labels_ = as_mask(h.n, self.result_.U).astype(np.int64)
        self.value_ = self.result_.value
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
