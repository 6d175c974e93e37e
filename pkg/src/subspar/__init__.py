"""Sublinear-query probabilistic spectral sparsification and cut applications."""

from .cuts import (CutResult, brute_force_sparsest_cut, max_flow_exact, min_st_cut_approx,
                   sparsest_cut_driver, sweep_cut)
from .estimators import MinSTCut, SparsestCut, SublinearSparsifier
from .expander import ExpanderGraph, build_expander, spectral_gap
from .graph import StaticGraph, cut_value, load_edge_list, parse_edge_list, store_edge_list
from .hardness import (binomial_anticoncentration, build_gkp, build_hidden_cut_union, build_clique_gadget,
                       distinguishing_query_experiment, estimator_deviation_experiment)
from .oracle import OracleHandle, OverlayGraph, implicit_backend
from .sparsifier import PreconditionError, SparsifyConfig, sublinear_sparsify
from .spectral import (VerificationReport, check_cut_sandwich, check_lower_bound, check_upper_bound,
                       verify_resistance_sandwich)

__version__ = "0.1.0"

__all__ = [
    "CutResult", "ExpanderGraph", "MinSTCut", "OracleHandle", "OverlayGraph", "PreconditionError",
    "SparsestCut", "SparsifyConfig", "StaticGraph", "SublinearSparsifier", "VerificationReport",
    "binomial_anticoncentration", "brute_force_sparsest_cut", "build_expander", "build_gkp",
    "build_hidden_cut_union", "build_clique_gadget", "check_cut_sandwich", "check_lower_bound",
    "check_upper_bound", "cut_value", "distinguishing_query_experiment", "estimator_deviation_experiment",
    "implicit_backend", "load_edge_list", "max_flow_exact", "min_st_cut_approx", "parse_edge_list",
    "sparsest_cut_driver", "spectral_gap", "store_edge_list", "sublinear_sparsify", "sweep_cut",
    "verify_resistance_sandwich",
]
