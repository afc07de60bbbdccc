"""Command-line interface: ``solvkernel <subcommand> [options]``.

Every subcommand reads an optional ``--config`` JSON file and writes one JSON
document to ``--out`` (stdout when omitted). Failures exit nonzero with a
single ``{"error": code, "detail": text}`` object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis
from .errors import ConfigError, SolvKernelError
from .gpr import fit, predict, predict_mean
from .io import RunConfig, load_csv, load_model, model_to_dict, save_model
from .kernel import kernel_matrix
from .model_selection import grid_search, mae, pearson_r2, refit, rmse, split_by_id
from .molgraph import build_adjacency
from .smiles import from_smiles

ELEMENT_SETS = (("C", "H"), ("C", "H", "O"), ("C", "H", "O", "N"))


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write(doc: dict, out: str | None) -> None:
    text = json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=target.name, suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metrics(pred, y) -> dict:
    out = {"n": int(len(y)), "mae": mae(pred, y), "rmse": rmse(pred, y)}
    try:
        out["r2"] = pearson_r2(pred, y)
    except SolvKernelError:
        out["r2"] = None
    return out


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        return RunConfig(**{**cfg.__dict__, "threads": args.threads})
    return cfg


# ---------------------------------------------------------------- commands

def cmd_parse(args, cfg: RunConfig) -> dict:
    k = cfg.kernel
    g = from_smiles(args.smiles, k.radii)
    A = build_adjacency(g, k.zeta, k.radii, k.adjacency_convention)
    doc = g.to_dict(A)
    doc["smiles"] = args.smiles
    return doc


def cmd_kernel(args, cfg: RunConfig) -> dict:
    data = load_csv(args.data, require_target=False)
    normalized = args.normalized or cfg.normalized
    km = kernel_matrix(data.graphs(cfg.kernel.radii), cfg.kernel, normalized=normalized,
                       threads=cfg.threads)
    n = len(data)
    return {"ids": data.ids, "normalized": normalized, "kernel": cfg.kernel.to_dict(),
            "matrix": {"rows": n, "cols": n, "data": km.values.ravel().tolist()}}


def cmd_train(args, cfg: RunConfig) -> dict:
    data = load_csv(args.data).sorted_by_id()
    model = fit(data.graphs(cfg.kernel.radii), data.targets, cfg.kernel, cfg.gp,
                normalized=cfg.normalized, threads=cfg.threads, ids=data.ids,
                smiles=data.smiles)
    save_model(model, args.model)
    pred = predict_mean(model, list(model.graphs), threads=cfg.threads)
    return {"model": str(args.model), "n_train": len(data), "mean": model.mean,
            "sigma2": model.sigma2, "train_metrics": _metrics(pred, data.targets)}


def cmd_cv(args, cfg: RunConfig) -> dict:
    data = load_csv(args.data)
    train, test = split_by_id(data, cfg.train_fraction, cfg.n_test)
    report = grid_search(train, cfg.grid, cfg.kernel, mean_mode=cfg.gp.mean_mode,
                         normalized=cfg.normalized, threads=cfg.threads)
    model = refit(train, report.best, cfg.kernel, mean_mode=cfg.gp.mean_mode,
                  normalized=cfg.normalized, threads=cfg.threads)
    test_graphs = test.graphs(cfg.kernel.radii)
    mean, var = predict(model, test_graphs, threads=cfg.threads)
    train_pred = predict_mean(model, list(model.graphs), threads=cfg.threads)
    doc = report.to_dict()
    doc.update({
        "n_train": len(train), "n_test": len(test),
        "train_metrics": _metrics(train_pred, train.targets),
        "test_metrics": _metrics(mean, test.targets),
        "test_predictions": [{"id": r.id, "target": r.target, "mean": float(m),
                              "variance": float(v)} for r, m, v in zip(test, mean, var)],
        "element_subsets": [s.to_dict() for s in analysis.element_subset_eval(
            mean, test.targets, test_graphs, ELEMENT_SETS)],
        "model": model_to_dict(model),
    })
    if args.model:
        save_model(model, args.model)
    if args.timings:
        _write({"timings": report.timings()}, args.timings)
    return doc


def cmd_predict(args, cfg: RunConfig) -> dict:
    model = load_model(args.model)
    data = load_csv(args.data, require_target=False)
    mean, var = predict(model, data.graphs(model.kernel_hyper.radii), threads=cfg.threads)
    doc = {"predictions": [{"id": r.id, "mean": float(m), "variance": float(v)}
                           for r, m, v in zip(data, mean, var)]}
    y = data.targets
    if np.all(np.isfinite(y)):
        doc["metrics"] = _metrics(mean, y)
    return doc


def cmd_bertz(args, cfg: RunConfig) -> dict:
    data = load_csv(args.data, require_target=False).sorted_by_id()
    rep = analysis.bci_report(data.graphs(cfg.kernel.radii), data.ids, args.bin_width)
    doc = rep.to_dict()
    if len(data) >= 2:
        train, test = split_by_id(data, cfg.train_fraction, cfg.n_test)
        idx = {rid: k for k, rid in enumerate(data.ids)}
        doc["split_means"] = {
            "train": float(np.mean([rep.values[idx[r]] for r in train.ids])),
            "test": float(np.mean([rep.values[idx[r]] for r in test.ids])),
        }
    return doc


def cmd_distance(args, cfg: RunConfig) -> dict:
    model = load_model(args.model)
    data = load_csv(args.data, require_target=False)
    rep = analysis.distance_diagnostics(list(model.graphs), data.graphs(model.kernel_hyper.radii),
                                        model.kernel_hyper, threads=cfg.threads)
    doc = rep.to_dict()
    doc["test_ids"] = data.ids
    return doc


def cmd_embed(args, cfg: RunConfig) -> dict:
    model = load_model(args.model)
    order = sorted(range(len(model.ids)), key=lambda i: model.ids[i].encode("utf-8"))
    C = model.covariance()[np.ix_(order, order)]
    mode = args.mode or cfg.embed_mode
    res = analysis.embed_mds(C, args.dmax, mode=mode)
    doc = res.to_dict()
    doc.update({"mode": mode, "ids": [model.ids[i] for i in order]})
    return doc


COMMANDS = {
    "parse": cmd_parse, "kernel": cmd_kernel, "train": cmd_train, "cv": cmd_cv,
    "predict": cmd_predict, "bertz": cmd_bertz, "distance": cmd_distance, "embed": cmd_embed,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--out", help="output JSON path (default: stdout)")
    common.add_argument("--threads", type=int, help="worker threads for kernel assembly")

    p = argparse.ArgumentParser(prog="solvkernel",
                                description="Marginalized graph kernel GPR for solvation energies")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="perceive a SMILES string")
    s.add_argument("--smiles", required=True)

    s = sub.add_parser("kernel", parents=[common], help="pairwise kernel matrix of a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--normalized", action="store_true")

    s = sub.add_parser("train", parents=[common], help="fit with configured hyperparameters")
    s.add_argument("--data", required=True)
    s.add_argument("--model", required=True)

    s = sub.add_parser("cv", parents=[common], help="split, grid search and refit")
    s.add_argument("--data", required=True)
    s.add_argument("--model", help="also save the refitted model here")
    s.add_argument("--timings", help="write per-candidate wall-clock seconds here")

    s = sub.add_parser("predict", parents=[common], help="predict with a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)

    s = sub.add_parser("bertz", parents=[common], help="Bertz complexity report")
    s.add_argument("--data", required=True)
    s.add_argument("--bin-width", type=float, default=20.0)

    s = sub.add_parser("distance", parents=[common], help="distances to a model's training set")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)

    s = sub.add_parser("embed", parents=[common], help="MDS of a model's training covariance")
    s.add_argument("--model", required=True)
    s.add_argument("--mode", choices=("raw", "distance"))
    s.add_argument("--dmax", type=int, required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        doc = COMMANDS[args.command](args, cfg)
        _write(doc, args.out)
    except SolvKernelError as exc:
        return _fail(exc.code, str(exc))
    except OSError as exc:
        return _fail("IOError", str(exc))
    except (ValueError, MemoryError) as exc:
        return _fail(type(exc).__name__, str(exc))
    return 0


def _fail(code: str, detail: str) -> int:
    sys.stderr.write(json.dumps({"error": code, "detail": detail}) + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
