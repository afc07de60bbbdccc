"""Marginalized graph kernel between molecular graphs.

The kernel is the expected product of vertex and edge similarities along
simultaneous random walks on two graphs. It is evaluated exactly by solving
the linear equilibrium system on the product graph; see ``_core.pyx`` for the
compiled solvers and ``_fallback.py`` for the numpy version.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DegenerateSelfKernel, FixedPointDivergence, SingularSystem
from ..molgraph import EdgeLabel, MolecularGraph, VertexLabel
from . import _fallback
from .params import KernelHyperparameters
from .prepare import PreparedGraph, pack, prepare

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_SOLVER_CODES = {"auto": 0, "dense": 1, "fixed-point": 2}
_backend = "compiled" if _core is not None else "python"
if os.environ.get("SOLVKERNEL_BACKEND") == "python":
    _backend = "python"


def available_backends() -> list[str]:
    return (["compiled"] if _core is not None else []) + ["python"]


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Select ``"compiled"`` or ``"python"`` for subsequent kernel evaluations."""
    global _backend
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _backend = name


def default_threads() -> int:
    return os.cpu_count() or 1


def vertex_kernel(v: VertexLabel, w: VertexLabel, nu: float) -> float:
    return 1.0 if v == w else nu


def edge_kernel(e: EdgeLabel, f: EdgeLabel, lam: float, epsilon: float = 1.0) -> float:
    k = math.exp(-0.5 * (e.length - f.length) ** 2 / lam ** 2)
    if e.discrete() != f.discrete():
        k *= epsilon
    return k


def _evaluate(prepared: Sequence[PreparedGraph], gi: np.ndarray, gj: np.ndarray,
              hyper: KernelHyperparameters, threads: int | None = None) -> np.ndarray:
    """Raw kernel for each index pair; pairs are split into contiguous chunks per thread."""
    gi = np.ascontiguousarray(gi, dtype=np.int64)
    gj = np.ascontiguousarray(gj, dtype=np.int64)
    m = len(gi)
    out = np.zeros(m)
    status = np.zeros(m, dtype=np.int32)
    if m == 0:
        return out
    threads = max(1, min(threads or default_threads(), m))
    args = (hyper.nu, hyper.lam, hyper.epsilon, hyper.q, _SOLVER_CODES[hyper.solver],
            hyper.dense_max, hyper.tol, hyper.max_iter)
    if _backend == "compiled":
        pk = pack(prepared)
        arrays = (pk.vptr, pk.vlab, pk.first, pk.count, pk.degree, pk.nbr, pk.adj,
                  pk.elen, pk.ecode)

        def run(lo, hi):
            _core.kernel_pairs(*arrays, gi[lo:hi], gj[lo:hi], *args,
                               out[lo:hi], status[lo:hi])
    else:
        def run(lo, hi):
            _fallback.kernel_pairs(prepared, gi[lo:hi], gj[lo:hi], *args,
                                   out[lo:hi], status[lo:hi])

    bounds = np.linspace(0, m, threads + 1).astype(int)
    if threads == 1:
        run(0, m)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(run, bounds[:-1], bounds[1:]))
    if np.any(status == 1):
        raise FixedPointDivergence(
            f"fixed-point iteration hit max_iter={hyper.max_iter} for "
            f"{int(np.sum(status == 1))} pair(s)")
    if np.any(status == 2):
        raise SingularSystem("product-graph system is not positive definite")
    if np.any(status == 3):
        raise MemoryError("kernel solver could not allocate its buffers")
    return out


def mgk_raw(g1: MolecularGraph, g2: MolecularGraph, hyper: KernelHyperparameters) -> float:
    prepared = [prepare(g1, hyper), prepare(g2, hyper)]
    return float(_evaluate(prepared, np.array([0]), np.array([1]), hyper, threads=1)[0])


def mgk_normalized(g1: MolecularGraph, g2: MolecularGraph,
                   hyper: KernelHyperparameters) -> float:
    prepared = [prepare(g1, hyper), prepare(g2, hyper)]
    k12, k11, k22 = _evaluate(prepared, np.array([0, 0, 1]), np.array([1, 0, 1]),
                              hyper, threads=1)
    if not (k11 > 0 and k22 > 0):
        raise DegenerateSelfKernel("self-kernel is not positive")
    return float(k12 / math.sqrt(k11 * k22))


def graph_distance(g1: MolecularGraph, g2: MolecularGraph,
                   hyper: KernelHyperparameters) -> float:
    """Kernel-induced distance sqrt(2 - 2 K_hat), in [0, sqrt(2)]."""
    return float(distance_from_kernel(mgk_normalized(g1, g2, hyper)))


def distance_from_kernel(k_hat):
    return np.sqrt(np.clip(2.0 - 2.0 * np.asarray(k_hat), 0.0, None))


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    normalized: bool
    hyper: KernelHyperparameters
    diagonal: np.ndarray  # raw self-kernels, used for normalization

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape


def _normalize(K, da, db):
    if np.any(da <= 0) or np.any(db <= 0):
        raise DegenerateSelfKernel("self-kernel is not positive")
    return K / np.sqrt(np.outer(da, db))


def kernel_matrix(graphs: Sequence[MolecularGraph], hyper: KernelHyperparameters,
                  normalized: bool = True, threads: int | None = None) -> KernelMatrix:
    """Symmetric pairwise kernel matrix; only the upper triangle is evaluated."""
    if not graphs:
        raise ValueError("kernel_matrix needs at least one graph")
    prepared = [prepare(g, hyper) for g in graphs]
    n = len(graphs)
    iu, ju = np.triu_indices(n)
    vals = _evaluate(prepared, iu, ju, hyper, threads)
    K = np.empty((n, n))
    K[iu, ju] = vals
    K[ju, iu] = vals
    diag = np.diag(K).copy()
    if normalized:
        K = _normalize(K, diag, diag)
        np.fill_diagonal(K, 1.0)
    return KernelMatrix(K, normalized, hyper, diag)


def self_kernels(graphs: Sequence[MolecularGraph], hyper: KernelHyperparameters,
                 threads: int | None = None) -> np.ndarray:
    prepared = [prepare(g, hyper) for g in graphs]
    idx = np.arange(len(graphs))
    return _evaluate(prepared, idx, idx, hyper, threads)


def cross_kernel_matrix(graphs_a: Sequence[MolecularGraph], graphs_b: Sequence[MolecularGraph],
                        hyper: KernelHyperparameters, normalized: bool = True,
                        threads: int | None = None, diag_a: np.ndarray | None = None,
                        diag_b: np.ndarray | None = None) -> np.ndarray:
    """Rectangular kernel matrix ``K[i, j] = k(a_i, b_j)``.

    Self-kernels for normalization may be passed in to avoid recomputation.
    """
    na, nb = len(graphs_a), len(graphs_b)
    prepared = [prepare(g, hyper) for g in graphs_a] + [prepare(g, hyper) for g in graphs_b]
    ii, jj = np.meshgrid(np.arange(na), np.arange(nb), indexing="ij")
    gi, gj = ii.ravel(), jj.ravel() + na
    if normalized:
        extra_a = np.arange(na) if diag_a is None else np.zeros(0, dtype=np.int64)
        extra_b = np.arange(na, na + nb) if diag_b is None else np.zeros(0, dtype=np.int64)
        gi = np.concatenate([gi, extra_a, extra_b])
        gj = np.concatenate([gj, extra_a, extra_b])
    vals = _evaluate(prepared, gi, gj, hyper, threads)
    K = vals[:na * nb].reshape(na, nb)
    if not normalized:
        return K
    rest = vals[na * nb:]
    if diag_a is None:
        diag_a, rest = rest[:na], rest[na:]
    if diag_b is None:
        diag_b = rest[:nb]
    return _normalize(K, np.asarray(diag_a), np.asarray(diag_b))
