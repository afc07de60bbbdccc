import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solvkernel.dataset import Dataset, Record
from solvkernel.errors import (
    ConfigError,
    DegenerateVariance,
    EmptyDataset,
    LengthMismatch,
    TooFewRecords,
)
from solvkernel.model_selection import (
    HyperGrid,
    grid_search,
    kfold,
    kfold_indices,
    mae,
    pearson_r2,
    rmse,
    split_by_id,
)


def toy(n):
    return Dataset(tuple(Record(f"K{i:04d}", "C" * (1 + i % 4), float(i)) for i in range(n)))


def test_split_reference_sizes():
    tr, te = split_by_id(toy(588), 550 / 588)
    assert (len(tr), len(te)) == (550, 38)
    tr, te = split_by_id(toy(580), n_test=38)
    assert (len(tr), len(te)) == (542, 38)
    assert max(tr.ids) < min(te.ids)


def test_split_rejects_empty_part():
    with pytest.raises(EmptyDataset):
        split_by_id(toy(10), 0.99)
    with pytest.raises(ConfigError):
        split_by_id(toy(10), 1.0)
    with pytest.raises(EmptyDataset):
        split_by_id(Dataset(()), 0.5)


def test_split_ignores_input_order():
    d = toy(50)
    shuffled = d.subset(np.random.default_rng(0).permutation(50))
    assert split_by_id(d, 0.8)[1].ids == split_by_id(shuffled, 0.8)[1].ids


def test_split_is_bytewise():
    d = Dataset((Record("b", "C", 0), Record("B", "C", 1), Record("a", "C", 2)))
    assert split_by_id(d, n_test=1)[0].ids == ["B", "a"]


def test_kfold_blocks():
    blocks = kfold_indices(10, 10)
    assert all(len(b) == 1 for b in blocks)
    assert [len(b) for b in kfold_indices(3600, 10)] == [360] * 10
    assert [len(b) for b in kfold_indices(23, 5)] == [5, 5, 5, 4, 4]
    with pytest.raises(TooFewRecords):
        kfold_indices(3, 5)
    with pytest.raises(ConfigError):
        kfold_indices(3, 1)


def test_kfold_partition():
    folds = kfold(toy(37), 10)
    vals = [v.ids for _, v in folds]
    flat = [i for v in vals for i in v]
    assert sorted(flat) == sorted(toy(37).ids) and len(set(flat)) == 37
    for tr, va in folds:
        assert set(tr.ids).isdisjoint(va.ids) and len(tr) + len(va) == 37


def test_metrics():
    assert mae([1, 2], [1, 2]) == 0 == rmse([1, 2], [1, 2])
    assert mae([1, 2], [0, 0]) == 1.5
    assert rmse([1, 2], [0, 0]) == pytest.approx(math.sqrt(2.5))
    y = np.array([1.0, 2, 4, 3, 7])
    assert pearson_r2(2 * y + 3, y) == pytest.approx(1.0)
    assert pearson_r2([1, -1, 1, -1], [1, 1, -1, -1]) == pytest.approx(0.0)
    # hand example: x=(1,2,3,4,5), y=(2,4,5,4,5): r = 6/sqrt(10*6)
    assert pearson_r2([1, 2, 3, 4, 5], [2, 4, 5, 4, 5]) == pytest.approx(36 / 60, rel=1e-12)
    with pytest.raises(LengthMismatch):
        mae([1], [1, 2])
    with pytest.raises(DegenerateVariance):
        pearson_r2([1, 2], [3, 3])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=30))
def test_rmse_dominates_mae(pairs):
    p, t = zip(*pairs)
    assert rmse(p, t) >= mae(p, t) - 1e-9
    perm = np.random.default_rng(len(p)).permutation(len(p))
    assert mae(np.array(p)[perm], np.array(t)[perm]) == pytest.approx(mae(p, t))


def test_grid_candidates_order_and_duplicates():
    g = HyperGrid(nu=(0.5, 0.1, 0.1), lam=(0.1,), zeta=(1.0,), q=(0.05,), alpha=(0.01,),
                  sigma2=(1.0,), folds=2)
    assert [c.nu for c in g.candidates()] == [0.1, 0.1, 0.5]
    assert len(HyperGrid().candidates()) == 3 * 3 * 2 * 3 * 3 * 2
    with pytest.raises(ConfigError):
        HyperGrid(nu=(1.5,))
    with pytest.raises(ConfigError):
        HyperGrid(alpha=())
    assert HyperGrid.from_dict(HyperGrid().to_dict()) == HyperGrid()


@pytest.fixture(scope="module")
def toy40(freesolv):
    return freesolv.subset(range(0, 400, 10))


def test_grid_search_selects_minimum(toy40):
    grid = HyperGrid(nu=(0.1, 0.5), lam=(0.1,), zeta=(1.0,), q=(0.05,),
                     alpha=(1e-2, 1.0), sigma2=(1.0, 10.0), folds=5)
    rep = grid_search(toy40, grid)
    means = [r.mean_mae for r in rep.rows]
    assert rep.rows[rep.selected].mean_mae == min(means)
    assert rep.n_fits == 8 * 5
    assert all(len(r.fold_mae) == 5 for r in rep.rows)
    assert rep.to_dict()["selected"] == rep.best.to_dict()


def test_grid_search_single_and_duplicate(toy40):
    one = HyperGrid(nu=(0.3,), lam=(0.1,), zeta=(1.0,), q=(0.05,), alpha=(0.01,),
                    sigma2=(1.0,), folds=4)
    rep = grid_search(toy40, one)
    assert rep.selected == 0
    dup = HyperGrid(nu=(0.3, 0.3), lam=(0.1,), zeta=(1.0,), q=(0.05,), alpha=(0.01,),
                    sigma2=(1.0,), folds=4)
    rep2 = grid_search(toy40, dup)
    assert rep2.rows[0].mean_mae == rep2.rows[1].mean_mae == rep.rows[0].mean_mae
    assert rep2.selected == 0


def test_grid_search_records_failures(toy40):
    dup = toy40.subset([0, 0, 1, 2, 3, 4, 5, 6], ":dup")
    dup = Dataset(tuple(Record(f"{r.id}-{k}", r.smiles, r.target)
                        for k, r in enumerate(dup)))
    grid = HyperGrid(nu=(0.3,), lam=(0.1,), zeta=(1.0,), q=(0.05,), alpha=(0.0, 0.1),
                     sigma2=(1.0,), folds=2)
    rep = grid_search(dup, grid)
    assert math.isinf(rep.rows[0].mean_mae)
    assert rep.selected == 1
