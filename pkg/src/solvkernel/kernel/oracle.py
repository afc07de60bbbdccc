"""Truncated brute-force evaluation of the marginalized graph kernel.

Walks on each graph are enumerated explicitly up to a maximum length. Walks
with identical label sequences contribute identically to every pair, so they
are merged with summed probabilities before the pairwise sum. No linear
system is involved; this is the independent check on the solvers.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from ..errors import OracleScaleExceeded
from ..molgraph import MolecularGraph, build_adjacency, transition_matrix
from .params import KernelHyperparameters

MAX_PRODUCT_SIZE = 30
MAX_LENGTH = 12


def _walk_levels(graph: MolecularGraph, hyper: KernelHyperparameters, L: int):
    """For each length 1..L, a map from label sequence to total walk probability."""
    n = graph.n_vertices
    A = build_adjacency(graph, hyper.zeta, hyper.radii, hyper.adjacency_convention)
    P = transition_matrix(A, hyper.q)
    nbrs = graph.neighbors()
    emap = graph.edge_map()
    vcode = [v.code() for v in graph.vertices]
    # state: (vertex codes, edge (length, code) pairs, current vertex) -> probability
    states = defaultdict(float)
    for h in range(n):
        states[(vcode[h],), (), h] += 1.0 / n
    levels = []
    for length in range(1, L + 1):
        done = defaultdict(float)
        for (vs, es, h), w in states.items():
            done[vs, es] += w * hyper.q
        levels.append(done)
        if length == L:
            break
        nxt = defaultdict(float)
        for (vs, es, h), w in states.items():
            for i in nbrs[h]:
                e = emap[h, i]
                nxt[vs + (vcode[i],), es + ((e.length, e.code()),), i] += w * P[h, i]
        states = nxt
    return levels


def _level_sum(la: dict, lb: dict, hyper: KernelHyperparameters, chunk: int = 512) -> float:
    if not la or not lb:
        return 0.0
    keys_a, keys_b = list(la), list(lb)
    wa = np.array([la[k] for k in keys_a])
    wb = np.array([lb[k] for k in keys_b])
    va = np.array([k[0] for k in keys_a])
    vb = np.array([k[0] for k in keys_b])
    ell = va.shape[1]
    if ell > 1:
        la_len = np.array([[e[0] for e in k[1]] for k in keys_a])
        lb_len = np.array([[e[0] for e in k[1]] for k in keys_b])
        la_code = np.array([[e[1] for e in k[1]] for k in keys_a])
        lb_code = np.array([[e[1] for e in k[1]] for k in keys_b])
    total = 0.0
    for s in range(0, len(keys_a), chunk):
        sl = slice(s, s + chunk)
        sim = np.where(va[sl, None, :] == vb[None, :, :], 1.0, hyper.nu).prod(axis=2)
        if ell > 1:
            d = la_len[sl, None, :] - lb_len[None, :, :]
            ke = np.exp(-0.5 * d ** 2 / hyper.lam ** 2)
            if hyper.epsilon != 1.0:
                ke = np.where(la_code[sl, None, :] == lb_code[None, :, :], ke,
                              hyper.epsilon * ke)
            sim = sim * ke.prod(axis=2)
        total += float(wa[sl] @ sim @ wb)
    return total


def brute_force_terms(g1: MolecularGraph, g2: MolecularGraph,
                      hyper: KernelHyperparameters, L: int) -> list[float]:
    """Per-length contributions to the kernel for walk lengths 1..L."""
    if g1.n_vertices * g2.n_vertices > MAX_PRODUCT_SIZE:
        raise OracleScaleExceeded(
            f"product size {g1.n_vertices * g2.n_vertices} exceeds {MAX_PRODUCT_SIZE}")
    if not 1 <= L <= MAX_LENGTH:
        raise OracleScaleExceeded(f"max path length must lie in [1, {MAX_LENGTH}]")
    a = _walk_levels(g1, hyper, L)
    b = _walk_levels(g2, hyper, L)
    return [_level_sum(x, y, hyper) for x, y in zip(a, b)]


def brute_force_kernel(g1: MolecularGraph, g2: MolecularGraph,
                       hyper: KernelHyperparameters, L: int) -> float:
    return math.fsum(brute_force_terms(g1, g2, hyper, L))
