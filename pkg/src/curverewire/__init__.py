"""Curvature-guided stochastic rewiring for simple graph convolutions."""

from .curvature import CurvatureVector, bfc_all, compute, jlc_all, jlc_edge, ollivier_exact
from .data import Dataset, Splits, gen_erdos_renyi, gen_sbm, load_dataset, make_splits
from .graph import Graph, RewiredView, build_graph, materialize, read_edge_list
from .rewiring import EdgeBank, RewiringConfig, build_edge_bank, sjlr_epoch_view
from .sgc import ModelConfig, SGCModel, TrainConfig, evaluate, predict, train
from .spectral import SpectralReport, cheeger_constant, spectral_extremes, spectral_report

__version__ = "0.1.0"

__all__ = [
    "CurvatureVector", "Dataset", "EdgeBank", "Graph", "ModelConfig", "RewiredView", "RewiringConfig",
    "SGCModel", "SpectralReport", "Splits", "TrainConfig", "bfc_all", "build_edge_bank", "build_graph",
    "cheeger_constant", "compute", "evaluate", "gen_erdos_renyi", "gen_sbm", "jlc_all", "jlc_edge",
    "load_dataset", "make_splits", "materialize", "ollivier_exact", "predict", "read_edge_list",
    "sjlr_epoch_view", "spectral_extremes", "spectral_report", "train",
]
