"""Gaussian process regression over molecular graphs.

Targets are in kcal/mol. The covariance between molecules is
``sigma2 * K_hat`` where ``K_hat`` is the (by default cosine-normalized)
marginalized graph kernel; ``alpha`` is added to the training diagonal and
doubles as observation noise and numerical regularizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .errors import ConfigError, NotPositiveDefinite
from .kernel import KernelHyperparameters, cross_kernel_matrix, kernel_matrix, self_kernels
from .molgraph import MolecularGraph

MEAN_MODES = ("zero", "centered", "constant")


@dataclass(frozen=True)
class GPHyperparameters:
    """Signal variance, diagonal noise and mean treatment.

    ``mean_mode`` is ``"zero"`` (prior mean 0), ``"centered"`` (prior mean is
    the training-target average) or ``"constant"`` (generalized-least-squares
    estimate of a constant mean, with the signal variance re-estimated from
    the data).
    """

    sigma2: float = 1.0
    alpha: float = 1e-2
    mean_mode: str = "centered"

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")
        if not self.alpha >= 0:
            raise ConfigError("alpha must be non-negative")
        if self.mean_mode not in MEAN_MODES:
            raise ConfigError(f"mean_mode must be one of {MEAN_MODES}")

    def to_dict(self) -> dict:
        return {"sigma2": self.sigma2, "alpha": self.alpha, "mean_mode": self.mean_mode}

    @classmethod
    def from_dict(cls, d: dict) -> "GPHyperparameters":
        unknown = set(d) - {"sigma2", "alpha", "mean_mode"}
        if unknown:
            raise ConfigError(f"unknown GP settings: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class GPState:
    """Posterior pieces that depend only on the training kernel and targets."""

    mean: float
    sigma2: float
    chol: np.ndarray      # lower Cholesky factor of C = sigma2 * K + alpha * I
    weights: np.ndarray   # C^-1 (y - mean)
    residual: np.ndarray  # y - mean


def _cholesky(C: np.ndarray) -> np.ndarray:
    try:
        return cholesky(C, lower=True, check_finite=True)
    except LinAlgError:
        raise NotPositiveDefinite(
            "training covariance is not positive definite; raise alpha") from None


def fit_kernel(K: np.ndarray, y: np.ndarray, gp: GPHyperparameters) -> GPState:
    """Fit from a precomputed training kernel matrix."""
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if K.shape != (n, n) or n == 0:
        raise ValueError("kernel matrix and targets disagree in size")
    if gp.mean_mode == "constant":
        Lpsi = _cholesky(K + (gp.alpha / gp.sigma2) * np.eye(n))
        ones = np.ones(n)
        pinv_y = cho_solve((Lpsi, True), y)
        pinv_1 = cho_solve((Lpsi, True), ones)
        mu = float(ones @ pinv_y / (ones @ pinv_1))
        r = y - mu
        pinv_r = cho_solve((Lpsi, True), r)
        s2 = float(r @ pinv_r / n)
        scale = max(1.0, float(np.max(np.abs(y))))
        if s2 <= (1e-12 * scale) ** 2:
            # constant targets: nothing left to explain, keep the prior scale
            s2 = gp.sigma2
        L = math.sqrt(s2) * Lpsi
        return GPState(mu, s2, L, pinv_r / s2, r)
    mu = float(np.mean(y)) if gp.mean_mode == "centered" else 0.0
    L = _cholesky(gp.sigma2 * K + gp.alpha * np.eye(n))
    r = y - mu
    return GPState(mu, gp.sigma2, L, cho_solve((L, True), r), r)


def predict_kernel(state: GPState, K_cross: np.ndarray) -> np.ndarray:
    """Posterior mean given ``K_cross[i, j] = k(test_i, train_j)``."""
    return state.mean + state.sigma2 * (np.asarray(K_cross) @ state.weights)


def variance_kernel(state: GPState, K_cross: np.ndarray, K_test_diag: np.ndarray) -> np.ndarray:
    V = solve_triangular(state.chol, state.sigma2 * np.asarray(K_cross).T, lower=True)
    var = state.sigma2 * np.asarray(K_test_diag) - np.sum(V * V, axis=0)
    return np.where(var < 0, 0.0, var)


@dataclass
class TrainedModel:
    graphs: tuple[MolecularGraph, ...]
    y: np.ndarray
    kernel_hyper: KernelHyperparameters
    gp_hyper: GPHyperparameters
    normalized: bool
    state: GPState
    self_k: np.ndarray  # raw self-kernels of the training graphs
    ids: tuple[str, ...] = ()
    smiles: tuple[str, ...] = ()
    K_train: np.ndarray | None = field(default=None, repr=False)

    @property
    def mean(self) -> float:
        return self.state.mean

    @property
    def sigma2(self) -> float:
        return self.state.sigma2

    @property
    def weights(self) -> np.ndarray:
        return self.state.weights

    @property
    def chol(self) -> np.ndarray:
        return self.state.chol

    def covariance(self) -> np.ndarray:
        """Training covariance ``C = L L^T``."""
        return self.chol @ self.chol.T


def fit(graphs: Sequence[MolecularGraph], y, kernel_hyper: KernelHyperparameters,
        gp_hyper: GPHyperparameters | None = None, normalized: bool = True,
        threads: int | None = None, ids: Sequence[str] = (),
        smiles: Sequence[str] = ()) -> TrainedModel:
    gp_hyper = gp_hyper or GPHyperparameters()
    y = np.asarray(y, dtype=float)
    if len(graphs) != len(y) or len(y) == 0:
        raise ValueError("need one target per graph and at least one graph")
    km = kernel_matrix(graphs, kernel_hyper, normalized=normalized, threads=threads)
    state = fit_kernel(km.values, y, gp_hyper)
    return TrainedModel(tuple(graphs), y, kernel_hyper, gp_hyper, normalized, state,
                        km.diagonal, tuple(ids), tuple(smiles), km.values)


def _cross(model: TrainedModel, graphs, threads):
    return cross_kernel_matrix(graphs, model.graphs, model.kernel_hyper,
                               normalized=model.normalized, threads=threads,
                               diag_b=model.self_k if model.normalized else None)


def predict_mean(model: TrainedModel, graphs: Sequence[MolecularGraph],
                 threads: int | None = None) -> np.ndarray:
    return predict_kernel(model.state, _cross(model, graphs, threads))


def predict_variance(model: TrainedModel, graphs: Sequence[MolecularGraph],
                     full: bool = False, threads: int | None = None):
    """Posterior variance per molecule; with ``full=True`` also the covariance matrix."""
    Kx = _cross(model, graphs, threads)
    if full:
        Kss = kernel_matrix(graphs, model.kernel_hyper, normalized=model.normalized,
                            threads=threads).values
        V = solve_triangular(model.chol, model.sigma2 * Kx.T, lower=True)
        cov = model.sigma2 * Kss - V.T @ V
        var = np.diag(cov).copy()
        var[var < 0] = 0.0
        return var, cov
    diag = (np.ones(len(graphs)) if model.normalized
            else self_kernels(graphs, model.kernel_hyper, threads))
    return variance_kernel(model.state, Kx, diag)


def predict(model: TrainedModel, graphs: Sequence[MolecularGraph],
            threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance with a single cross-kernel evaluation."""
    Kx = _cross(model, graphs, threads)
    diag = (np.ones(len(graphs)) if model.normalized
            else self_kernels(graphs, model.kernel_hyper, threads))
    return predict_kernel(model.state, Kx), variance_kernel(model.state, Kx, diag)


def log_marginal_likelihood(model: TrainedModel | GPState) -> float:
    state = model.state if isinstance(model, TrainedModel) else model
    n = len(state.residual)
    return float(-0.5 * state.residual @ state.weights
                 - np.sum(np.log(np.diag(state.chol)))
                 - 0.5 * n * math.log(2 * math.pi))
