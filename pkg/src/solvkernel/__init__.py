"""Marginalized graph kernels and Gaussian process regression for solvation free energies."""

from .dataset import Dataset, Record, bundled_freesolv_path
from .gpr import (
    GPHyperparameters,
    TrainedModel,
    fit,
    log_marginal_likelihood,
    predict,
    predict_mean,
    predict_variance,
)
from .io import RunConfig, load_csv, load_model, save_model
from .kernel import (
    KernelHyperparameters,
    brute_force_kernel,
    cross_kernel_matrix,
    graph_distance,
    kernel_matrix,
    mgk_normalized,
    mgk_raw,
)
from .model_selection import HyperGrid, grid_search, kfold, mae, pearson_r2, rmse, split_by_id
from .molgraph import MolecularGraph, RadiiTable
from .smiles import from_smiles

__version__ = "0.1.0"

__all__ = [
    "Dataset", "GPHyperparameters", "HyperGrid", "KernelHyperparameters", "MolecularGraph",
    "RadiiTable", "Record", "RunConfig", "TrainedModel", "brute_force_kernel",
    "bundled_freesolv_path", "cross_kernel_matrix", "fit", "from_smiles", "graph_distance",
    "grid_search", "kernel_matrix", "kfold", "load_csv", "load_model",
    "log_marginal_likelihood", "mae", "mgk_normalized", "mgk_raw", "pearson_r2", "predict",
    "predict_mean", "predict_variance", "rmse", "save_model", "split_by_id",
]
