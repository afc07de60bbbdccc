"""Pure numpy evaluation of the kernel, used when the compiled core is absent.

Same algorithms and status codes as the compiled path, written with dense
per-pair matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .prepare import PreparedGraph

OK, DIVERGED, SINGULAR = 0, 1, 2
SOLVER_AUTO, SOLVER_DENSE, SOLVER_FIXED = 0, 1, 2


def _product_terms(a: PreparedGraph, b: PreparedGraph, nu, lam, eps):
    kv = np.where(a.vlab[:, None] == b.vlab[None, :], 1.0, nu).ravel()
    diff = a.lengths[:, None, :, None] - b.lengths[None, :, None, :]
    ke = np.exp(-0.5 * diff ** 2 / lam ** 2)
    if eps != 1.0:
        same = a.ecode[:, None, :, None] == b.ecode[None, :, None, :]
        ke = np.where(same, ke, eps * ke)
    W = a.adjacency[:, None, :, None] * b.adjacency[None, :, None, :] * ke
    N = a.n * b.n
    return kv, W.reshape(N, N)


def pair_kernel(a: PreparedGraph, b: PreparedGraph, nu, lam, eps, q,
                solver, dense_max, tol, max_iter) -> tuple[float, int]:
    if a.n == 1 or b.n == 1:
        kv = np.where(a.vlab[:, None] == b.vlab[None, :], 1.0, nu)
        return float(kv.sum() * q * q / (a.n * b.n)), OK
    kv, W = _product_terms(a, b, nu, lam, eps)
    dd = np.outer(a.degree, b.degree).ravel()
    c = (1.0 - q) ** 2
    N = a.n * b.n
    use_dense = solver == SOLVER_DENSE or (solver == SOLVER_AUTO and N <= dense_max)
    if use_dense:
        S = np.diag(dd / kv) - c * W
        try:
            s = cho_solve(cho_factor(S, lower=True), dd * q * q)
        except LinAlgError:
            return float("nan"), SINGULAR
        return float(s.sum() / N), OK
    M = c * W / dd[:, None] * kv[None, :]
    b0 = q * q
    r = np.full(N, b0)
    for _ in range(max_iter):
        rn = b0 + M @ r
        done = np.max(np.abs(rn - r)) <= tol * np.max(np.abs(rn))
        r = rn
        if done:
            return float((kv * r).sum() / N), OK
    return float((kv * r).sum() / N), DIVERGED


def kernel_pairs(prepared, gi, gj, nu, lam, eps, q, solver, dense_max, tol, max_iter,
                 out, status):
    for k, (i, j) in enumerate(zip(gi, gj)):
        out[k], status[k] = pair_kernel(prepared[i], prepared[j], nu, lam, eps, q,
                                        solver, dense_max, tol, max_iter)
