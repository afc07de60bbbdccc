"""Dataset diagnostics: Bertz complexity, histograms, element subsets, graph
distances and a classical-MDS view of covariance matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import EmptyInput, NonSymmetricInput
from .kernel import KernelHyperparameters, cross_kernel_matrix, distance_from_kernel, kernel_matrix
from .molgraph import MolecularGraph

FAR_THRESHOLD = 1.0
MAX_DISTANCE = math.sqrt(2.0)


# ---------------------------------------------------------------- Bertz index

def adjacent_edge_pairs(graph: MolecularGraph) -> list[tuple[int, int, int]]:
    """Unordered pairs of distinct edges sharing a vertex.

    Returns
    -------
    list of (center, edge_a, edge_b)
        Edge indices refer to ``graph.edges``; ``edge_a < edge_b``.
    """
    incident: list[list[int]] = [[] for _ in graph.vertices]
    for k, (i, j, _) in enumerate(graph.edges):
        incident[i].append(k)
        incident[j].append(k)
    pairs = []
    for v, inc in enumerate(incident):
        for a in range(len(inc)):
            for b in range(a + 1, len(inc)):
                pairs.append((v, inc[a], inc[b]))
    return pairs


def refine_colors(graph: MolecularGraph) -> list[int]:
    """Weisfeiler-Lehman color refinement to a stable partition.

    Colors are ranks of sorted signatures, so they do not depend on vertex
    numbering.
    """
    nbrs = [[] for _ in graph.vertices]
    for i, j, e in graph.edges:
        nbrs[i].append((j, e.code()))
        nbrs[j].append((i, e.code()))
    colors = _rank([v.code() for v in graph.vertices])
    n_classes = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted((ec, colors[u]) for u, ec in nbrs[v])))
                for v in range(len(colors))]
        new = _rank(sigs)
        if len(set(new)) == n_classes:
            return new
        colors, n_classes = new, len(set(new))


def _rank(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def symmetry_classes(pairs: Sequence[tuple[int, int, int]],
                     graph: MolecularGraph) -> list[list[tuple[int, int, int]]]:
    """Group adjacent-edge pairs by the refined colors of the three atoms and the edge labels."""
    colors = refine_colors(graph)
    groups: dict[tuple, list] = {}
    for center, ea, eb in pairs:
        ends = []
        for k in (ea, eb):
            i, j, e = graph.edges[k]
            far = j if i == center else i
            ends.append((e.code(), colors[far]))
        sig = (colors[center], tuple(sorted(ends)))
        groups.setdefault(sig, []).append((center, ea, eb))
    return [groups[k] for k in sorted(groups)]


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def bertz_index(graph: MolecularGraph) -> float:
    """Bertz complexity ``2 n log2 n - sum n_i log2 n_i`` over adjacent-edge pairs (bits)."""
    pairs = adjacent_edge_pairs(graph)
    n = len(pairs)
    if n == 0:
        return 0.0
    sizes = [len(c) for c in symmetry_classes(pairs, graph)]
    return 2.0 * _xlog2x(n) - math.fsum(_xlog2x(s) for s in sizes)


# ----------------------------------------------------------------- histograms

@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(),
                "density": self.density.tolist()}


def histogram(values, bin_width: float | None = None, bins: int | None = None,
              edges: Sequence[float] | None = None) -> Histogram:
    """Histogram with left-closed bins and densities ``counts / (N * width)``.

    Give one of ``bin_width`` (edges on multiples of the width), ``bins``
    (equal bins spanning the data) or explicit ``edges``. The last bin is
    closed on the right so the maximum is always counted.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInput("histogram of no values")
    if sum(v is not None for v in (bin_width, bins, edges)) != 1:
        raise ValueError("give exactly one of bin_width, bins and edges")
    lo, hi = float(x.min()), float(x.max())
    if edges is not None:
        e = np.asarray(edges, dtype=float)
    elif bin_width is not None:
        if not bin_width > 0:
            raise ValueError("bin_width must be positive")
        start = math.floor(lo / bin_width)
        stop = math.floor(hi / bin_width) + 1
        e = np.arange(start, stop + 1) * bin_width
    else:
        if bins < 1:
            raise ValueError("need at least one bin")
        if lo == hi:
            e = np.array([lo - 0.5, lo + 0.5])
        else:
            e = np.linspace(lo, hi, bins + 1)
    counts, e = np.histogram(x, bins=e)
    widths = np.diff(e)
    total = counts.sum()
    density = counts / (total * widths) if total else np.zeros_like(widths)
    return Histogram(e, counts.astype(int), density)


# ------------------------------------------------------------------- reports

@dataclass
class BciReport:
    ids: list[str]
    values: np.ndarray
    mean: float
    hist: Histogram

    def to_dict(self) -> dict:
        return {"ids": self.ids, "bci": self.values.tolist(), "mean": self.mean,
                "histogram": self.hist.to_dict()}


def bci_report(graphs: Sequence[MolecularGraph], ids: Sequence[str] | None = None,
               bin_width: float = 20.0) -> BciReport:
    vals = np.array([bertz_index(g) for g in graphs])
    if vals.size == 0:
        raise EmptyInput("no molecules")
    ids = list(ids) if ids is not None else [g.source_id for g in graphs]
    return BciReport(ids, vals, float(vals.mean()), histogram(vals, bin_width=bin_width))


@dataclass
class SubsetMetrics:
    elements: tuple[str, ...]
    size: int
    mae: float
    rmse: float

    def to_dict(self) -> dict:
        return {"elements": list(self.elements), "size": self.size,
                "mae": self.mae, "rmse": self.rmse}


def element_subset_eval(predictions, truths, graphs: Sequence[MolecularGraph],
                        element_sets: Iterable[Iterable[str]]) -> list[SubsetMetrics]:
    """Metrics on test molecules whose elements all lie in each given set.

    Empty subsets are left out of the result rather than raising.
    """
    pred = np.asarray(predictions, dtype=float)
    y = np.asarray(truths, dtype=float)
    out = []
    for es in element_sets:
        allowed = set(es)
        mask = np.array([g.elements() <= allowed for g in graphs], dtype=bool)
        if not mask.any():
            continue
        err = pred[mask] - y[mask]
        out.append(SubsetMetrics(tuple(sorted(allowed)), int(mask.sum()),
                                 float(np.mean(np.abs(err))),
                                 float(np.sqrt(np.mean(err ** 2)))))
    return out


@dataclass
class DistanceReport:
    train_train_mean: float
    test_mean: np.ndarray       # per test molecule, mean distance to the training set
    test_min: np.ndarray        # per test molecule, nearest training distance
    far: np.ndarray             # nearest training molecule farther than FAR_THRESHOLD
    train_train: np.ndarray = field(repr=False)
    train_test: np.ndarray = field(repr=False)
    hists: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "train_train_mean": self.train_train_mean,
            "test_mean": self.test_mean.tolist(),
            "test_min": self.test_min.tolist(),
            "far": self.far.tolist(),
            "far_threshold": FAR_THRESHOLD,
            "histograms": {k: h.to_dict() for k, h in self.hists.items()},
        }


def distance_diagnostics(train: Sequence[MolecularGraph], test: Sequence[MolecularGraph],
                         hyper: KernelHyperparameters, threads: int | None = None,
                         bin_width: float = 0.05) -> DistanceReport:
    """Kernel-induced distances within the training set and from each test molecule to it."""
    if not train or not test:
        raise EmptyInput("distance diagnostics need non-empty training and test sets")
    ktt = kernel_matrix(train, hyper, normalized=True, threads=threads)
    kx = cross_kernel_matrix(test, train, hyper, normalized=True, threads=threads,
                             diag_b=ktt.diagonal)
    d_tt = np.clip(distance_from_kernel(ktt.values), 0.0, MAX_DISTANCE)
    np.fill_diagonal(d_tt, 0.0)
    d_x = np.clip(distance_from_kernel(kx), 0.0, MAX_DISTANCE)
    m = len(train)
    iu = np.triu_indices(m, 1)
    tt_pairs = d_tt[iu]
    tt_mean = float(tt_pairs.mean()) if tt_pairs.size else 0.0
    test_mean = d_x.mean(axis=1)
    test_min = d_x.min(axis=1)
    edges = np.arange(0.0, MAX_DISTANCE + bin_width, bin_width)
    hists = {"test_mean": histogram(test_mean, edges=edges),
             "train_test": histogram(d_x.ravel(), edges=edges)}
    if tt_pairs.size:
        hists["train_train"] = histogram(tt_pairs, edges=edges)
    return DistanceReport(tt_mean, test_mean, test_min, test_min > FAR_THRESHOLD,
                          d_tt, d_x, hists)


# ----------------------------------------------------------------------- MDS

EMBED_MODES = ("raw", "distance")


@dataclass
class EmbeddingResult:
    points: np.ndarray
    eigenvalues: np.ndarray
    error_curve: np.ndarray
    d_at_10pct: int | None
    threshold: float = 0.1

    def to_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(),
                "error_curve": self.error_curve.tolist(),
                "d_at_10pct": self.d_at_10pct,
                "points": {"rows": int(self.points.shape[0]), "cols": int(self.points.shape[1]),
                           "data": self.points.ravel().tolist()}}


def embed_mds(C, d_max: int, mode: str = "raw", threshold: float = 0.1) -> EmbeddingResult:
    """Embed the rows of a distance-like matrix in ``d`` dimensions, anchored at the first row.

    Parameters
    ----------
    C : (m, m) array
        Symmetric matrix. In ``raw`` mode it is used as a distance matrix
        as given; in ``distance`` mode it is a covariance converted first
        through ``sqrt(C_ii + C_jj - 2 C_ij)``.
    d_max : int
        Largest embedding dimension evaluated.

    Returns
    -------
    EmbeddingResult
        ``error_curve[d-1]`` is ``||C~(d) - C||_F / ||C||_F`` where ``C~(d)``
        holds Euclidean distances between the first ``d`` coordinates.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] < 2:
        raise NonSymmetricInput("need a square matrix with at least two rows")
    scale = max(1.0, float(np.max(np.abs(C))))
    if not np.allclose(C, C.T, rtol=0, atol=1e-10 * scale):
        raise NonSymmetricInput("matrix is not symmetric")
    if mode not in EMBED_MODES:
        raise ValueError(f"mode must be one of {EMBED_MODES}")
    m = C.shape[0]
    if not 1 <= d_max <= m:
        raise ValueError(f"d_max must lie in [1, {m}]")
    if mode == "distance":
        dg = np.diag(C)
        C = np.sqrt(np.clip(dg[:, None] + dg[None, :] - 2 * C, 0.0, None))
    C2 = C * C
    T = 0.5 * (C2[0, :][None, :] + C2[:, 0][:, None] - C2)
    T = 0.5 * (T + T.T)
    S, U = np.linalg.eigh(T)
    order = np.argsort(S)[::-1]
    S, U = S[order], U[:, order]
    X = U * np.sqrt(np.clip(S, 0.0, None))
    norm = np.linalg.norm(C)
    errors = np.empty(d_max)
    for d in range(1, d_max + 1):
        Ct = squareform(pdist(X[:, :d]))
        errors[d - 1] = np.linalg.norm(Ct - C) / norm if norm > 0 else 0.0
    hit = np.nonzero(errors < threshold)[0]
    d10 = int(hit[0]) + 1 if hit.size else None
    return EmbeddingResult(X[:, :d_max], S, errors, d10, threshold)
