# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled marginalized-graph-kernel evaluation over batches of graph pairs.

Each pair is solved independently with private buffers, so any partition of
the pair list across threads yields bitwise identical results.
"""

from libc.math cimport exp, fabs
from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport calloc, free, malloc
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

cdef enum:
    OK = 0
    DIVERGED = 1
    SINGULAR = 2
    NOMEM = 3

cdef enum:
    SOLVER_AUTO = 0
    SOLVER_DENSE = 1
    SOLVER_FIXED = 2


cdef struct Graph:
    int64_t n
    const int64_t* vlab
    const int64_t* first
    const int64_t* count
    const double* degree


cdef struct Edges:
    const int64_t* nbr
    const double* adj
    const double* elen
    const int64_t* ecode


cdef struct Params:
    double nu
    double inv2lam2
    double eps
    double q
    double tol
    int64_t max_iter


cdef inline double edge_sim(const Edges* E, int64_t ea, int64_t eb, const Params* p) noexcept nogil:
    cdef double d = E.elen[ea] - E.elen[eb]
    cdef double k = exp(-d * d * p.inv2lam2)
    if E.ecode[ea] != E.ecode[eb]:
        k *= p.eps
    return k


cdef double single_vertex(const Graph* a, const Graph* b, const Params* p) noexcept nogil:
    # a one-atom graph has no moves: only length-1 walks contribute
    cdef int64_t h, k
    cdef double s = 0.0
    for h in range(a.n):
        for k in range(b.n):
            s += 1.0 if a.vlab[h] == b.vlab[k] else p.nu
    return s * p.q * p.q / (a.n * b.n)


cdef int solve_dense(const Graph* a, const Graph* b, const Edges* E, const Params* p,
                     double* out) noexcept nogil:
    """Cholesky solve of the symmetrized system (D x D' / Kv - c W) s = D x D' q q'."""
    cdef int N = <int>(a.n * b.n)
    cdef int one = 1
    cdef int info = 0
    cdef char uplo = b'L'
    cdef double c = (1.0 - p.q) * (1.0 - p.q)
    cdef double* S = <double*>calloc(<size_t>N * N, sizeof(double))
    cdef double* rhs = <double*>malloc(<size_t>N * sizeof(double))
    cdef int64_t h, k, ea, eb, i, j, P, Q
    cdef double dd, kv, s
    if S == NULL or rhs == NULL:
        free(S)
        free(rhs)
        return NOMEM
    for h in range(a.n):
        for k in range(b.n):
            P = h * b.n + k
            dd = a.degree[h] * b.degree[k]
            kv = 1.0 if a.vlab[h] == b.vlab[k] else p.nu
            S[P * N + P] = dd / kv
            rhs[P] = dd * p.q * p.q
            for ea in range(a.first[h], a.first[h] + a.count[h]):
                i = E.nbr[ea]
                for eb in range(b.first[k], b.first[k] + b.count[k]):
                    j = E.nbr[eb]
                    Q = i * b.n + j
                    S[P * N + Q] -= c * E.adj[ea] * E.adj[eb] * edge_sim(E, ea, eb, p)
    dpotrf(&uplo, &N, S, &N, &info)
    if info == 0:
        dpotrs(&uplo, &N, &one, S, &N, rhs, &N, &info)
    if info != 0:
        free(S)
        free(rhs)
        return SINGULAR
    s = 0.0
    for P in range(N):
        s += rhs[P]
    out[0] = s / N
    free(S)
    free(rhs)
    return OK


cdef int solve_fixed_point(const Graph* a, const Graph* b, const Edges* E, const Params* p,
                           double* out) noexcept nogil:
    """Jacobi iteration r <- q q' + M r on the sparse product graph."""
    cdef int64_t N = a.n * b.n
    cdef int64_t nnz = 0
    cdef int64_t h, k, ea, eb, i, j, P, Q, t, it
    cdef double c = (1.0 - p.q) * (1.0 - p.q)
    cdef double b0 = p.q * p.q
    cdef double s, diff, big, w
    for h in range(a.n):
        for k in range(b.n):
            nnz += a.count[h] * b.count[k]
    cdef int64_t* ptr = <int64_t*>malloc((N + 1) * sizeof(int64_t))
    cdef int64_t* tgt = <int64_t*>malloc((nnz + 1) * sizeof(int64_t))
    cdef double* wt = <double*>malloc((nnz + 1) * sizeof(double))
    cdef double* kv = <double*>malloc(N * sizeof(double))
    cdef double* r = <double*>malloc(N * sizeof(double))
    cdef double* rn = <double*>malloc(N * sizeof(double))
    cdef double* tmp
    if ptr == NULL or tgt == NULL or wt == NULL or kv == NULL or r == NULL or rn == NULL:
        free(ptr); free(tgt); free(wt); free(kv); free(r); free(rn)
        return NOMEM
    for h in range(a.n):
        for k in range(b.n):
            kv[h * b.n + k] = 1.0 if a.vlab[h] == b.vlab[k] else p.nu
    t = 0
    for h in range(a.n):
        for k in range(b.n):
            P = h * b.n + k
            ptr[P] = t
            for ea in range(a.first[h], a.first[h] + a.count[h]):
                i = E.nbr[ea]
                for eb in range(b.first[k], b.first[k] + b.count[k]):
                    j = E.nbr[eb]
                    Q = i * b.n + j
                    w = c * E.adj[ea] / a.degree[h] * E.adj[eb] / b.degree[k]
                    tgt[t] = Q
                    wt[t] = w * edge_sim(E, ea, eb, p) * kv[Q]
                    t += 1
    ptr[N] = t
    for P in range(N):
        r[P] = b0
    cdef int status = DIVERGED
    for it in range(p.max_iter):
        diff = 0.0
        big = 0.0
        for P in range(N):
            s = b0
            for t in range(ptr[P], ptr[P + 1]):
                s += wt[t] * r[tgt[t]]
            rn[P] = s
            if fabs(s - r[P]) > diff:
                diff = fabs(s - r[P])
            if fabs(s) > big:
                big = fabs(s)
        tmp = r
        r = rn
        rn = tmp
        if diff <= p.tol * big:
            status = OK
            break
    s = 0.0
    for P in range(N):
        s += kv[P] * r[P]
    out[0] = s / N
    free(ptr); free(tgt); free(wt); free(kv); free(r); free(rn)
    return status


def kernel_pairs(const int64_t[::1] vptr, const int64_t[::1] vlab,
                 const int64_t[::1] first, const int64_t[::1] count,
                 const double[::1] degree, const int64_t[::1] nbr,
                 const double[::1] adj, const double[::1] elen,
                 const int64_t[::1] ecode,
                 const int64_t[::1] gi, const int64_t[::1] gj,
                 double nu, double lam, double eps, double q,
                 int solver, int64_t dense_max, double tol, int64_t max_iter,
                 double[::1] out, int32_t[::1] status):
    """Evaluate the raw kernel for graph pairs ``(gi[k], gj[k])`` into ``out[k]``.

    ``status[k]`` is 0 on success, 1 when the fixed-point cap was hit,
    2 when the Cholesky factorization failed and 3 on allocation failure.
    """
    cdef Params p
    p.nu = nu
    p.inv2lam2 = 0.5 / (lam * lam)
    p.eps = eps
    p.q = q
    p.tol = tol
    p.max_iter = max_iter
    cdef Edges E
    cdef int64_t m = gi.shape[0]
    cdef int64_t k, va, vb
    cdef Graph A, B
    cdef int use_dense
    if m == 0:
        return
    E.nbr = &nbr[0] if nbr.shape[0] else NULL
    E.adj = &adj[0] if adj.shape[0] else NULL
    E.elen = &elen[0] if elen.shape[0] else NULL
    E.ecode = &ecode[0] if ecode.shape[0] else NULL
    with nogil:
        for k in range(m):
            va = vptr[gi[k]]
            vb = vptr[gj[k]]
            A.n = vptr[gi[k] + 1] - va
            B.n = vptr[gj[k] + 1] - vb
            A.vlab = &vlab[va]
            A.first = &first[va]
            A.count = &count[va]
            A.degree = &degree[va]
            B.vlab = &vlab[vb]
            B.first = &first[vb]
            B.count = &count[vb]
            B.degree = &degree[vb]
            if A.n == 1 or B.n == 1:
                out[k] = single_vertex(&A, &B, &p)
                status[k] = OK
                continue
            if solver == SOLVER_DENSE:
                use_dense = 1
            elif solver == SOLVER_FIXED:
                use_dense = 0
            else:
                use_dense = A.n * B.n <= dense_max
            if use_dense:
                status[k] = solve_dense(&A, &B, &E, &p, &out[k])
            else:
                status[k] = solve_fixed_point(&A, &B, &E, &p, &out[k])
