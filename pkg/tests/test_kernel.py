import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solvkernel.errors import OracleScaleExceeded
from solvkernel.kernel import (
    KernelHyperparameters,
    available_backends,
    brute_force_kernel,
    cross_kernel_matrix,
    edge_kernel,
    get_backend,
    graph_distance,
    kernel_matrix,
    mgk_normalized,
    mgk_raw,
    set_backend,
    vertex_kernel,
)
from solvkernel.molgraph import EdgeLabel, VertexLabel
from solvkernel.smiles import from_smiles

from conftest import SMALL

H = KernelHyperparameters()


@pytest.fixture(params=available_backends())
def backend(request):
    old = get_backend()
    set_backend(request.param)
    yield request.param
    set_backend(old)


def test_microkernels():
    c, o = VertexLabel("C"), VertexLabel("O")
    assert vertex_kernel(c, c, 0.3) == 1.0
    assert vertex_kernel(c, o, 0.3) == 0.3 == vertex_kernel(o, c, 0.3)
    a = EdgeLabel(1.0, False, False, False, 1.52)
    b = EdgeLabel(2.0, False, True, False, 1.32)
    assert edge_kernel(a, a, 0.1) == 1.0
    assert edge_kernel(a, b, 0.2) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert edge_kernel(a, b, 0.2, epsilon=0.5) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-14)
    far = EdgeLabel(1.0, False, False, False, 50.0)
    assert edge_kernel(a, far, 0.1) == 0.0


def test_single_vertex_closed_form(backend):
    h = KernelHyperparameters(q=0.1, nu=0.3)
    c, o = from_smiles("C"), from_smiles("O")
    assert mgk_raw(c, c, h) == pytest.approx(0.01, rel=1e-14)
    assert mgk_raw(c, o, h) == pytest.approx(0.003, rel=1e-14)
    assert mgk_normalized(c, o, h) == pytest.approx(0.3, rel=1e-14)
    assert brute_force_kernel(c, o, h, L=3) == pytest.approx(0.003, rel=1e-14)


def test_oracle_small_pair(backend):
    h = KernelHyperparameters(q=0.3)
    g1, g2 = from_smiles("CC"), from_smiles("CO")
    assert abs(brute_force_kernel(g1, g2, h, L=10) - mgk_raw(g1, g2, h)) <= 1e-6


def test_oracle_monotone_in_length():
    h = KernelHyperparameters(q=0.2)
    g1, g2 = from_smiles("CC=O"), from_smiles("CCO")
    vals = [brute_force_kernel(g1, g2, h, L=L) for L in range(1, 9)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_oracle_scale_guard():
    with pytest.raises(OracleScaleExceeded):
        brute_force_kernel(from_smiles("CCCCCC"), from_smiles("CCCCCC"), H, L=4)


@pytest.mark.parametrize("solver", ["dense", "fixed-point"])
def test_symmetry(solver, backend):
    h = H.with_(solver=solver)
    for a, b in itertools.combinations(SMALL[:12], 2):
        g1, g2 = from_smiles(a), from_smiles(b)
        k12, k21 = mgk_raw(g1, g2, h), mgk_raw(g2, g1, h)
        assert k12 == pytest.approx(k21, rel=1e-12)


def test_solver_and_backend_agreement(freesolv_graphs, rng):
    idx = rng.choice(len(freesolv_graphs), size=(20, 2))
    for i, j in idx:
        g1, g2 = freesolv_graphs[i], freesolv_graphs[j]
        vals = []
        for be in available_backends():
            set_backend(be)
            for solver in ("dense", "fixed-point"):
                vals.append(mgk_raw(g1, g2, H.with_(solver=solver)))
        set_backend(available_backends()[0])
        assert np.ptp(vals) <= 1e-9 * max(vals)


def test_permutation_invariance(rng):
    g = from_smiles("CC(=O)Nc1ccc(O)cc1")
    other = from_smiles("c1ccccc1CCO")
    base = mgk_raw(g, other, H)
    for _ in range(5):
        h = g.permuted(rng.permutation(g.n_vertices))
        assert mgk_raw(h, other, H) == pytest.approx(base, rel=1e-12)


def test_normalized_and_distance():
    graphs = [from_smiles(s) for s in SMALL[:10]]
    for g in graphs:
        assert mgk_normalized(g, g, H) == pytest.approx(1.0, abs=1e-14)
        assert graph_distance(g, g, H) == pytest.approx(0.0, abs=1e-7)
    K = kernel_matrix(graphs, H).values
    assert np.all(K >= 0) and np.all(K <= 1 + 1e-14)
    assert np.array_equal(np.diag(K), np.ones(len(graphs)))


def test_triangle_inequality(rng):
    graphs = [from_smiles(s) for s in SMALL]
    K = kernel_matrix(graphs, H).values
    D = np.sqrt(np.clip(2 - 2 * K, 0, None))
    for _ in range(20):
        i, j, k = rng.choice(len(graphs), 3, replace=False)
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-9


def test_kernel_matrix_psd_and_permutation(rng):
    graphs = [from_smiles(s) for s in SMALL[:20]]
    K = kernel_matrix(graphs, H).values
    assert np.allclose(K, K.T, rtol=0, atol=0)
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * np.trace(K) / 20
    perm = rng.permutation(20)
    Kp = kernel_matrix([graphs[i] for i in perm], H).values
    assert np.allclose(Kp, K[np.ix_(perm, perm)], rtol=1e-13, atol=0)
    assert kernel_matrix(graphs[:1], H).values.tolist() == [[1.0]]


def test_cross_kernel_matrix():
    a = [from_smiles(s) for s in SMALL[:6]]
    b = [from_smiles(s) for s in SMALL[6:10]]
    K = kernel_matrix(a, H).values
    assert np.allclose(cross_kernel_matrix(a, a, H), K, rtol=1e-13, atol=0)
    assert np.allclose(cross_kernel_matrix(a, b, H), cross_kernel_matrix(b, a, H).T,
                       rtol=1e-13, atol=0)
    assert cross_kernel_matrix(a[:1], b[:1], H)[0, 0] == pytest.approx(
        mgk_normalized(a[0], b[0], H), rel=1e-13)
    raw = cross_kernel_matrix(a, b, H, normalized=False)
    assert raw[0, 0] == pytest.approx(mgk_raw(a[0], b[0], H), rel=1e-13)


def test_threads_do_not_change_bits(freesolv_graphs):
    graphs = freesolv_graphs[:40]
    K1 = kernel_matrix(graphs, H, threads=1).values
    K4 = kernel_matrix(graphs, H, threads=4).values
    assert np.array_equal(K1, K4)


def test_monotone_in_nu():
    g1, g2 = from_smiles("CCO"), from_smiles("CC=O")
    vals = [mgk_normalized(g1, g2, H.with_(nu=nu)) for nu in np.linspace(0.05, 0.95, 10)]
    assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SMALL), st.sampled_from(SMALL), st.floats(0.2, 0.9))
def test_oracle_property(a, b, q):
    g1, g2 = from_smiles(a), from_smiles(b)
    if g1.n_vertices * g2.n_vertices > 30:
        return
    h = KernelHyperparameters(q=q)
    exact = mgk_raw(g1, g2, h)
    trunc = brute_force_kernel(g1, g2, h, L=12)
    # tail of the walk series bounded by the continuation mass after L steps
    assert trunc <= exact * (1 + 1e-12)
    assert exact - trunc <= (1 - q) ** 24 / (1 - (1 - q) ** 2) + 1e-12


def test_hyperparameter_validation():
    from solvkernel.errors import ConfigError
    for bad in (dict(nu=0), dict(nu=1), dict(lam=0), dict(q=1), dict(zeta=-1),
                dict(epsilon=0), dict(solver="lu")):
        with pytest.raises(ConfigError):
            KernelHyperparameters(**bad)
    h = KernelHyperparameters.from_dict({"lambda": 0.2, "adjacency_exponent_convention": "unsquared"})
    assert h.lam == 0.2 and h.adjacency_convention == "unsquared"
    assert KernelHyperparameters.from_dict(h.to_dict()) == h
