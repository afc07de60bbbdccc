"""Flatten molecular graphs into the arrays consumed by the kernel backends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..molgraph import MolecularGraph, build_adjacency
from .params import KernelHyperparameters


@dataclass(frozen=True)
class PreparedGraph:
    n: int
    vlab: np.ndarray      # (n,) int64 vertex label codes
    adjacency: np.ndarray  # (n, n) edge weights
    lengths: np.ndarray   # (n, n) bond lengths, 0 off-edge
    ecode: np.ndarray     # (n, n) int64 edge label codes, -1 off-edge
    degree: np.ndarray    # (n,) weighted degree


def prepare(graph: MolecularGraph, hyper: KernelHyperparameters) -> PreparedGraph:
    n = graph.n_vertices
    A = build_adjacency(graph, hyper.zeta, hyper.radii, hyper.adjacency_convention)
    L = np.zeros((n, n))
    C = np.full((n, n), -1, dtype=np.int64)
    for i, j, e in graph.edges:
        L[i, j] = L[j, i] = e.length
        C[i, j] = C[j, i] = e.code()
    vlab = np.array([v.code() for v in graph.vertices], dtype=np.int64)
    return PreparedGraph(n, vlab, A, L, C, A.sum(axis=1))


@dataclass(frozen=True)
class PackedGraphs:
    """Concatenated CSR layout of many graphs.

    Vertices of graph ``g`` occupy ``vptr[g]:vptr[g + 1]``; neighbor entries
    of global vertex ``v`` occupy ``first[v]:first[v] + count[v]`` and store
    graph-local neighbor indices.
    """

    vptr: np.ndarray
    vlab: np.ndarray
    first: np.ndarray
    count: np.ndarray
    degree: np.ndarray
    nbr: np.ndarray
    adj: np.ndarray
    elen: np.ndarray
    ecode: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.vptr)


def pack(prepared: Sequence[PreparedGraph]) -> PackedGraphs:
    vptr = np.zeros(len(prepared) + 1, dtype=np.int64)
    vlab, first, count, degree = [], [], [], []
    nbr, adj, elen, ecode = [], [], [], []
    entry = 0
    for g, p in enumerate(prepared):
        vptr[g + 1] = vptr[g] + p.n
        vlab.append(p.vlab)
        degree.append(p.degree)
        for h in range(p.n):
            cols = np.flatnonzero(p.ecode[h] >= 0)
            first.append(entry)
            count.append(len(cols))
            entry += len(cols)
            nbr.append(cols)
            adj.append(p.adjacency[h, cols])
            elen.append(p.lengths[h, cols])
            ecode.append(p.ecode[h, cols])

    def cat(parts, dtype):
        return np.ascontiguousarray(np.concatenate(parts).astype(dtype)) if parts \
            else np.zeros(0, dtype=dtype)

    return PackedGraphs(
        vptr=vptr,
        vlab=cat(vlab, np.int64),
        first=np.asarray(first, dtype=np.int64),
        count=np.asarray(count, dtype=np.int64),
        degree=cat(degree, np.float64),
        nbr=cat(nbr, np.int64),
        adj=cat(adj, np.float64),
        elen=cat(elen, np.float64),
        ecode=cat(ecode, np.int64),
    )
