import math

import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from solvkernel import analysis
from solvkernel.errors import EmptyInput, NonSymmetricInput
from solvkernel.kernel import KernelHyperparameters
from solvkernel.smiles import from_smiles

from conftest import SMALL

LOG6 = 6 * math.log2(6)


@pytest.mark.parametrize("smiles,n", [("CC", 0), ("CCC", 1), ("CC(C)(C)C", 6), ("c1ccccc1", 6)])
def test_adjacent_pairs(smiles, n):
    assert len(analysis.adjacent_edge_pairs(from_smiles(smiles))) == n


@pytest.mark.parametrize("smiles,bci", [("CC", 0.0), ("CCC", 0.0), ("c1ccccc1", LOG6),
                                        ("CC(C)(C)C", LOG6), ("C", 0.0)])
def test_bertz_anchors(smiles, bci):
    assert analysis.bertz_index(from_smiles(smiles)) == pytest.approx(bci, abs=1e-12)


def test_propanol_classes():
    g = from_smiles("CCCO")
    classes = analysis.symmetry_classes(analysis.adjacent_edge_pairs(g), g)
    assert len(classes) == 2
    assert sum(len(c) for c in classes) == 2


def test_partition_sums(freesolv_graphs):
    for g in freesolv_graphs[:100]:
        pairs = analysis.adjacent_edge_pairs(g)
        classes = analysis.symmetry_classes(pairs, g)
        assert sum(len(c) for c in classes) == len(pairs)
        degs = np.bincount(np.array([(i, j) for i, j, _ in g.edges]).ravel(),
                           minlength=g.n_vertices) if g.edges else np.zeros(1, int)
        assert len(pairs) == sum(d * (d - 1) // 2 for d in degs)
        assert analysis.bertz_index(g) >= 0


def test_bertz_permutation_invariant(freesolv_graphs, rng):
    for g in freesolv_graphs[::60]:
        ref = analysis.bertz_index(g)
        for _ in range(3):
            h = g.permuted(rng.permutation(g.n_vertices))
            assert analysis.bertz_index(h) == pytest.approx(ref, abs=1e-12)


def test_histogram_properties(rng):
    x = rng.normal(size=1000)
    h = analysis.histogram(x, bin_width=0.25)
    assert np.all(h.density >= 0)
    assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0, abs=1e-9)
    k = np.searchsorted(h.edges, 0.0, side="right") - 1
    assert abs(h.density[k] - 1 / math.sqrt(2 * math.pi)) <= 0.12
    c = analysis.histogram([3.0, 3.0, 3.0], bin_width=0.5)
    assert np.count_nonzero(c.counts) == 1
    assert float(np.sum(c.density * np.diff(c.edges))) == pytest.approx(1.0)
    c2 = analysis.histogram([3.0] * 4, bins=5)
    assert c2.counts.tolist() == [4]
    with pytest.raises(EmptyInput):
        analysis.histogram([], bin_width=1.0)


def test_histogram_left_closed():
    h = analysis.histogram([0.0, 1.0, 1.5], bin_width=1.0)
    assert h.edges.tolist() == [0.0, 1.0, 2.0]
    assert h.counts.tolist() == [1, 2]


def test_element_subsets():
    graphs = [from_smiles(s) for s in ["CC", "CCO", "CCN", "CCCl", "c1ccccc1"]]
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    pred = y + np.array([0.1, -0.2, 0.3, -0.4, 0.5])
    res = analysis.element_subset_eval(pred, y, graphs, [("C", "H"), ("C", "H", "O"),
                                                        ("Br",), ("C", "H", "O", "N", "Cl")])
    sizes = {r.elements: r.size for r in res}
    assert sizes[("C", "H")] == 2
    assert sizes[("C", "H", "O")] == 3
    assert ("Br",) not in sizes
    full = res[-1]
    assert full.size == 5 and full.mae == pytest.approx(0.3)


def test_distance_diagnostics():
    h = KernelHyperparameters()
    train = [from_smiles(s) for s in SMALL[:12]]
    rep = analysis.distance_diagnostics(train, train, h)
    D = rep.train_train
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    assert np.all((D >= 0) & (D <= math.sqrt(2)))
    assert np.allclose(rep.test_mean, D.mean(axis=0), atol=1e-7)
    assert np.allclose(rep.test_min, 0.0, atol=1e-7)
    assert not rep.far.any()
    assert set(rep.hists) == {"train_train", "train_test", "test_mean"}
    edges = [tuple(x.edges) for x in rep.hists.values()]
    assert len(set(edges)) == 1


def test_far_flag():
    h = KernelHyperparameters(nu=0.1)
    train = [from_smiles(s) for s in ["CCCC", "CCCCC", "CCCCCC"]]
    rep = analysis.distance_diagnostics(train, [from_smiles("FC(F)(F)C(F)(F)F"),
                                                from_smiles("CCCCCCC")], h)
    assert rep.far.tolist() == [True, False]


def points_dm(points):
    return squareform(pdist(np.asarray(points, dtype=float)))


def test_mds_two_points_and_square():
    assert analysis.embed_mds(points_dm([[0.0], [1.0]]), 1).error_curve[0] == pytest.approx(0.0)
    sq = points_dm([[0, 0], [1, 0], [0, 1], [1, 1]])
    res = analysis.embed_mds(sq, 3)
    assert res.error_curve[1] <= 1e-10
    assert res.error_curve[0] > 0.1
    assert res.d_at_10pct == 2
    assert np.all(np.diff(res.eigenvalues) <= 1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_mds_recovery(k, rng):
    pts = rng.normal(size=(25, k))
    res = analysis.embed_mds(points_dm(pts), min(6, 25))
    assert res.error_curve[k - 1] <= 1e-8
    assert np.all(np.diff(res.error_curve) <= 1e-10)


def test_mds_distance_mode():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(10, 2))
    G = X @ X.T
    res = analysis.embed_mds(G, 3, mode="distance")
    assert res.error_curve[1] <= 1e-8


def test_mds_errors():
    with pytest.raises(NonSymmetricInput):
        analysis.embed_mds(np.array([[0, 1.0], [2.0, 0]]), 1)
    with pytest.raises(NonSymmetricInput):
        analysis.embed_mds(np.zeros((1, 1)), 1)
    with pytest.raises(ValueError):
        analysis.embed_mds(np.zeros((3, 3)), 4)
