"""Dataset CSV ingestion, run configuration, and JSON model persistence."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, Record
from .errors import (
    ConfigError,
    CorruptModel,
    DuplicateId,
    EmptyDataset,
    MissingColumn,
    UnparsableTarget,
    VersionMismatch,
)
from .gpr import GPHyperparameters, GPState, TrainedModel
from .kernel import KernelHyperparameters, kernel_matrix
from .model_selection import HyperGrid
from .molgraph import RadiiTable
from .smiles import from_smiles

FORMAT_VERSION = 1
REQUIRED_COLUMNS = ("id", "smiles", "target")


def load_csv(path, require_target: bool = True) -> Dataset:
    """Read an ``id,smiles,target`` CSV (extra columns ignored).

    With ``require_target=False`` the target column may be absent or blank;
    missing targets become NaN.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        needed = REQUIRED_COLUMNS if require_target else REQUIRED_COLUMNS[:2]
        missing = [c for c in needed if c not in cols]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
        records, seen = [], set()
        for rowno, row in enumerate(reader, start=2):
            rid = (row["id"] or "").strip()
            if rid in seen:
                raise DuplicateId(f"{path}: duplicate id {rid!r} (line {rowno})")
            seen.add(rid)
            raw = (row.get("target") or "").strip()
            if raw == "" and not require_target:
                target = math.nan
            else:
                try:
                    target = float(raw)
                except ValueError:
                    raise UnparsableTarget(
                        f"{path}: line {rowno}: target {raw!r} is not a number") from None
                if not math.isfinite(target):
                    raise UnparsableTarget(f"{path}: line {rowno}: target {raw!r} is not finite")
            records.append(Record(rid, (row["smiles"] or "").strip(), target))
    if not records:
        raise EmptyDataset(f"{path}: no records")
    return Dataset(tuple(records), str(path))


# ---------------------------------------------------------------- run config

@dataclass(frozen=True)
class RunConfig:
    kernel: KernelHyperparameters = field(default_factory=KernelHyperparameters)
    gp: GPHyperparameters = field(default_factory=GPHyperparameters)
    grid: HyperGrid = field(default_factory=HyperGrid)
    normalized: bool = True
    train_fraction: float | None = 550 / 588
    n_test: int | None = None
    embed_mode: str = "raw"
    threads: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {"kernel", "gp", "grid", "normalized", "split", "radii", "embed_mode", "threads"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        radii = RadiiTable.from_config(d["radii"]) if "radii" in d else RadiiTable()
        kernel = KernelHyperparameters.from_dict(d.get("kernel", {}), radii)
        gp = GPHyperparameters.from_dict(d.get("gp", {}))
        grid = HyperGrid.from_dict(d["grid"]) if "grid" in d else HyperGrid()
        split = d.get("split", {})
        if set(split) - {"train_fraction", "n_test"}:
            raise ConfigError("split accepts train_fraction or n_test")
        tf = split.get("train_fraction")
        nt = split.get("n_test")
        if tf is not None and nt is not None:
            raise ConfigError("give either split.train_fraction or split.n_test")
        if tf is None and nt is None:
            tf = 550 / 588
        if tf is not None and not 0 < tf < 1:
            raise ConfigError("split.train_fraction must lie in (0, 1)")
        if nt is not None and int(nt) < 1:
            raise ConfigError("split.n_test must be at least 1")
        mode = d.get("embed_mode", "raw")
        if mode not in ("raw", "distance"):
            raise ConfigError("embed_mode must be raw or distance")
        threads = d.get("threads")
        if threads is not None and int(threads) < 1:
            raise ConfigError("threads must be at least 1")
        return cls(kernel, gp, grid, bool(d.get("normalized", True)), tf,
                   None if nt is None else int(nt), mode,
                   None if threads is None else int(threads))

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)


# -------------------------------------------------------------- model files

def _matrix(a: np.ndarray) -> dict:
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": a.ravel().tolist()}


def model_to_dict(model: TrainedModel) -> dict:
    n = len(model.y)
    tril = model.chol[np.tril_indices(n)]
    return {
        "format_version": FORMAT_VERSION,
        "kernel": model.kernel_hyper.to_dict(),
        "gp": model.gp_hyper.to_dict(),
        "radii": model.kernel_hyper.radii.to_config(),
        "normalized": model.normalized,
        "mean_mode": model.gp_hyper.mean_mode,
        "mean": model.mean,
        "sigma2": model.sigma2,
        "training": [{"id": i, "smiles": s, "target": float(t)}
                     for i, s, t in zip(model.ids, model.smiles, model.y)],
        "self_kernels": model.self_k.tolist(),
        "weights": model.weights.tolist(),
        "cholesky_lower": {"n": n, "data": tril.tolist()},
    }


def save_model(model: TrainedModel, path) -> None:
    """Write the model as JSON; floats use Python's round-trip exact repr."""
    if len(model.ids) != len(model.y) or len(model.smiles) != len(model.y):
        raise ValueError("model must carry training ids and SMILES to be saved")
    text = json.dumps(model_to_dict(model), indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8")


def model_from_dict(d: dict, check: bool = True) -> TrainedModel:
    version = d.get("format_version") if isinstance(d, dict) else None
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version!r}, expected {FORMAT_VERSION}")
    try:
        radii = RadiiTable.from_config(d["radii"])
        kh = KernelHyperparameters.from_dict(d["kernel"], radii)
        gh = GPHyperparameters.from_dict(d["gp"])
        train = d["training"]
        ids = tuple(r["id"] for r in train)
        smiles = tuple(r["smiles"] for r in train)
        y = np.array([float(r["target"]) for r in train])
        n = len(y)
        w = np.array(d["weights"], dtype=float)
        self_k = np.array(d["self_kernels"], dtype=float)
        ch = d["cholesky_lower"]
        tril = np.array(ch["data"], dtype=float)
        if ch["n"] != n or tril.size != n * (n + 1) // 2 or w.size != n or self_k.size != n:
            raise CorruptModel("array sizes disagree with the number of training records")
        L = np.zeros((n, n))
        L[np.tril_indices(n)] = tril
        mean = float(d["mean"])
        state = GPState(mean, float(d["sigma2"]), L, w, y - mean)
        graphs = tuple(from_smiles(s, radii, i) for i, s in zip(ids, smiles))
        model = TrainedModel(graphs, y, kh, gh, bool(d["normalized"]), state, self_k,
                             ids, smiles)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (CorruptModel, VersionMismatch)):
            raise
        raise CorruptModel(f"malformed model document: {exc}") from None
    if check:
        _check_factor(model)
    return model


def _check_factor(model: TrainedModel, size: int = 5, tol: float = 1e-6) -> None:
    """Compare L L^T with a freshly computed covariance on a principal minor."""
    n = len(model.y)
    idx = np.unique(np.linspace(0, n - 1, min(size, n)).round().astype(int))
    graphs = [model.graphs[i] for i in idx]
    K = kernel_matrix(graphs, model.kernel_hyper, normalized=False).values
    if model.normalized:
        d = np.sqrt(model.self_k[idx])
        K = K / np.outer(d, d)
    # both mean modes share C = s2 * (K + alpha / sigma2 * I)
    C = model.sigma2 * (K + model.gp_hyper.alpha / model.gp_hyper.sigma2 * np.eye(len(idx)))
    L = model.chol[idx]
    got = L @ L.T
    if not np.allclose(got, C, rtol=0, atol=tol * max(1.0, float(np.abs(C).max()))):
        raise CorruptModel("stored Cholesky factor does not reproduce the covariance")


def load_model(path, check: bool = True) -> TrainedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
        d = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"{path}: unreadable model file ({exc})") from None
    return model_from_dict(d, check=check)
