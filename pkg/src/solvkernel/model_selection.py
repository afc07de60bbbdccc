"""Sorted-id splitting, k-fold cross-validation, grid search and error metrics."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import Dataset
from .errors import (
    ConfigError,
    DegenerateVariance,
    EmptyDataset,
    LengthMismatch,
    NotPositiveDefinite,
    TooFewRecords,
)
from .gpr import GPHyperparameters, TrainedModel, fit, fit_kernel, predict_kernel
from .kernel import KernelHyperparameters, kernel_matrix

GRID_KEYS = ("nu", "lambda", "zeta", "q", "alpha", "sigma2")


def split_by_id(dataset: Dataset, train_fraction: float | None = None,
                n_test: int | None = None) -> tuple[Dataset, Dataset]:
    """Sort by id (byte-wise) and cut into a leading train part and a trailing test part.

    The train size is ``ceil(train_fraction * N)``; alternatively give the
    test size directly with ``n_test``.
    """
    N = len(dataset)
    if N == 0:
        raise EmptyDataset("cannot split an empty dataset")
    if (train_fraction is None) == (n_test is None):
        raise ConfigError("give exactly one of train_fraction and n_test")
    if n_test is not None:
        n_train = N - int(n_test)
    else:
        if not 0 < train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        # guard against 550/588*588 landing a hair above 550
        n_train = math.ceil(train_fraction * N - 1e-9)
    if not 0 < n_train < N:
        raise EmptyDataset(f"split of {N} records leaves an empty part (train={n_train})")
    ordered = dataset.sorted_by_id()
    return (ordered.subset(range(n_train), ":train"),
            ordered.subset(range(n_train, N), ":test"))


def kfold_indices(N: int, k: int) -> list[np.ndarray]:
    """Contiguous validation blocks; the first ``N % k`` blocks get one extra record."""
    if k < 2:
        raise ConfigError("need k >= 2 folds")
    if N < k:
        raise TooFewRecords(f"{N} records cannot fill {k} folds")
    base, extra = divmod(N, k)
    sizes = [base + (1 if i < extra else 0) for i in range(k)]
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return [np.arange(bounds[i], bounds[i + 1]) for i in range(k)]


def kfold(dataset: Dataset, k: int = 10) -> list[tuple[Dataset, Dataset]]:
    ordered = dataset.sorted_by_id()
    N = len(ordered)
    folds = []
    for i, val in enumerate(kfold_indices(N, k)):
        train = np.setdiff1d(np.arange(N), val)
        folds.append((ordered.subset(train, f":fold{i}:train"),
                      ordered.subset(val, f":fold{i}:val")))
    return folds


def _pair(pred, truth):
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if len(pred) != len(truth) or len(pred) == 0:
        raise LengthMismatch(f"lengths {len(pred)} and {len(truth)}")
    return pred, truth


def mae(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(np.abs(pred - truth)))


def rmse(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def pearson_r2(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    if len(pred) < 2:
        raise DegenerateVariance("need at least two points")
    dp, dt = pred - pred.mean(), truth - truth.mean()
    sp, st = float(dp @ dp), float(dt @ dt)
    if st == 0 or sp == 0:
        raise DegenerateVariance("constant predictions or truths")
    return float((dp @ dt) ** 2 / (sp * st))


@dataclass(frozen=True)
class Candidate:
    nu: float
    lam: float
    zeta: float
    q: float
    alpha: float
    sigma2: float

    def as_tuple(self) -> tuple:
        return (self.nu, self.lam, self.zeta, self.q, self.alpha, self.sigma2)

    def kernel_key(self) -> tuple:
        return (self.nu, self.lam, self.zeta, self.q)

    def to_dict(self) -> dict:
        return dict(zip(GRID_KEYS, self.as_tuple()))

    def kernel_hyper(self, base: KernelHyperparameters) -> KernelHyperparameters:
        return base.with_(nu=self.nu, lam=self.lam, zeta=self.zeta, q=self.q)

    def gp_hyper(self, mean_mode: str) -> GPHyperparameters:
        return GPHyperparameters(sigma2=self.sigma2, alpha=self.alpha, mean_mode=mean_mode)


@dataclass(frozen=True)
class HyperGrid:
    nu: tuple = (0.1, 0.3, 0.5)
    lam: tuple = (0.05, 0.10, 0.20)
    zeta: tuple = (0.5, 1.0)
    q: tuple = (0.01, 0.05, 0.10)
    alpha: tuple = (1e-4, 1e-2, 1e-1)
    sigma2: tuple = (1.0, 10.0)
    folds: int = 10

    def __post_init__(self):
        for name in ("nu", "lam", "zeta", "q", "alpha", "sigma2"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"grid axis {name} is empty")
        for c in self.candidates():
            KernelHyperparameters(nu=c.nu, lam=c.lam, zeta=c.zeta, q=c.q)
            GPHyperparameters(sigma2=c.sigma2, alpha=c.alpha)
        if self.folds < 2:
            raise ConfigError("need at least two folds")

    def candidates(self) -> list[Candidate]:
        """All combinations in canonical (lexicographic) order; duplicates are kept."""
        combos = itertools.product(self.nu, self.lam, self.zeta, self.q, self.alpha,
                                   self.sigma2)
        return [Candidate(*c) for c in sorted(combos)]

    def to_dict(self) -> dict:
        return {"nu": list(self.nu), "lambda": list(self.lam), "zeta": list(self.zeta),
                "q": list(self.q), "alpha": list(self.alpha), "sigma2": list(self.sigma2),
                "folds": self.folds}

    @classmethod
    def from_dict(cls, d: dict) -> "HyperGrid":
        unknown = set(d) - set(GRID_KEYS) - {"folds"}
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
        kw = {("lam" if k == "lambda" else k): (tuple(float(x) for x in v)
                                                 if k != "folds" else int(v))
              for k, v in d.items()}
        return cls(**kw)


@dataclass
class CVRow:
    candidate: Candidate
    fold_mae: list[float]
    fold_rmse: list[float]
    mean_mae: float
    mean_rmse: float
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"candidate": self.candidate.to_dict(), "fold_mae": self.fold_mae,
                "fold_rmse": self.fold_rmse, "mean_mae": self.mean_mae,
                "mean_rmse": self.mean_rmse}


@dataclass
class CVReport:
    rows: list[CVRow]
    selected: int
    folds: int
    n_records: int
    extra: dict = field(default_factory=dict)

    @property
    def best(self) -> Candidate:
        return self.rows[self.selected].candidate

    @property
    def n_fits(self) -> int:
        return len(self.rows) * self.folds

    def to_dict(self) -> dict:
        """JSON-ready report. Wall-clock timings are excluded so reruns are byte-identical."""
        out = {
            "folds": self.folds,
            "n_records": self.n_records,
            "n_fits": self.n_fits,
            "selected_index": self.selected,
            "selected": self.best.to_dict(),
            "selected_mean_mae": self.rows[self.selected].mean_mae,
            "rows": [r.to_dict() for r in self.rows],
        }
        out.update(self.extra)
        return out

    def timings(self) -> list[dict]:
        return [{"candidate": r.candidate.to_dict(), "seconds": r.seconds} for r in self.rows]


def grid_search(train: Dataset, grid: HyperGrid | None = None,
                base_kernel: KernelHyperparameters | None = None,
                mean_mode: str = "centered", normalized: bool = True,
                threads: int | None = None, progress=None) -> CVReport:
    """Pick the candidate with the lowest mean validation MAE over k sorted-id folds.

    One kernel matrix is computed per distinct kernel setting and sliced for
    every fold and GP setting. A candidate whose fit fails is kept with
    infinite error.
    """
    grid = grid or HyperGrid()
    base_kernel = base_kernel or KernelHyperparameters()
    data = train.sorted_by_id()
    y = data.targets
    graphs = data.graphs(base_kernel.radii)
    N = len(data)
    folds = kfold_indices(N, grid.folds)
    train_idx = [np.setdiff1d(np.arange(N), v) for v in folds]
    cands = grid.candidates()
    groups: dict[tuple, list[int]] = {}
    for idx, c in enumerate(cands):
        groups.setdefault(c.kernel_key(), []).append(idx)

    rows: list[CVRow | None] = [None] * len(cands)
    for key, members in groups.items():
        t0 = time.perf_counter()
        K = kernel_matrix(graphs, cands[members[0]].kernel_hyper(base_kernel),
                          normalized=normalized, threads=threads).values
        k_time = (time.perf_counter() - t0) / len(members)
        for idx in members:
            t1 = time.perf_counter()
            c = cands[idx]
            gp = c.gp_hyper(mean_mode)
            f_mae, f_rmse = [], []
            for tr, va in zip(train_idx, folds):
                try:
                    state = fit_kernel(K[np.ix_(tr, tr)], y[tr], gp)
                    pred = predict_kernel(state, K[np.ix_(va, tr)])
                    f_mae.append(mae(pred, y[va]))
                    f_rmse.append(rmse(pred, y[va]))
                except NotPositiveDefinite:
                    f_mae.append(math.inf)
                    f_rmse.append(math.inf)
            rows[idx] = CVRow(c, f_mae, f_rmse, float(np.mean(f_mae)), float(np.mean(f_rmse)),
                              k_time + time.perf_counter() - t1)
        if progress is not None:
            progress(key)
    means = np.array([r.mean_mae for r in rows])
    selected = int(np.argmin(means))  # first minimum = lexicographically smallest
    return CVReport(rows, selected, grid.folds, N)


def refit(train: Dataset, candidate: Candidate, base_kernel: KernelHyperparameters | None = None,
          mean_mode: str = "centered", normalized: bool = True,
          threads: int | None = None) -> TrainedModel:
    base_kernel = base_kernel or KernelHyperparameters()
    data = train.sorted_by_id()
    return fit(data.graphs(base_kernel.radii), data.targets, candidate.kernel_hyper(base_kernel),
               candidate.gp_hyper(mean_mode), normalized=normalized, threads=threads,
               ids=data.ids, smiles=data.smiles)
