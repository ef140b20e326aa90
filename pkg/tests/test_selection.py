from collections.abc import Mapping

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cjdmd.dmd import CAUSAL_JUMP, HANKEL
from cjdmd.errors import ContractError
from cjdmd.nar import ar2, simulate_nar
from cjdmd.selection import TIE_TOL, fit_auto, rank_scan, split, sweep


class AccessLog(Mapping):
    """Mapping that records which keys were read, and in what order."""

    def __init__(self, data):
        self._data = dict(data)
        self.reads = []

    def __getitem__(self, key):
        self.reads.append(key)
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)


def ar2_family(n_series=6, n=80, seed=0):
    rng = np.random.default_rng(seed)
    return {f"s{i}": simulate_nar(ar2(), rng.uniform(-1, 1, 2), n) for i in range(n_series)}


@pytest.mark.parametrize("n, sizes", [(6, (2, 2, 2)), (7, (3, 2, 2)), (8, (3, 3, 2)), (96, (32, 32, 32))])
def test_split_sizes(n, sizes):
    s = split(range(n), seed=1)
    assert (len(s.train_ids), len(s.val_ids), len(s.test_ids)) == sizes


@given(st.integers(3, 60), st.integers(0, 2**32 - 1))
def test_split_partitions(n, seed):
    s = split([f"w{i}" for i in range(n)], seed)
    parts = [set(s.train_ids), set(s.val_ids), set(s.test_ids)]
    assert set().union(*parts) == {f"w{i}" for i in range(n)}
    assert sum(len(p) for p in parts) == n
    assert max(map(len, parts)) - min(map(len, parts)) <= 1
    assert split([f"w{i}" for i in range(n)], seed) == s


def test_split_seed_changes_assignment():
    ids = list(range(30))
    assert split(ids, 0).train_ids != split(ids, 1).train_ids


def test_split_needs_three():
    with pytest.raises(ContractError):
        split(["a", "b"], 0)


def test_rank_scan_ar2_picks_two():
    data = list(ar2_family().values())
    best, curve = rank_scan(data[:3], data[3:], 2, 1)
    assert best == 2
    assert [c.rank for c in curve] == [1, 2]
    assert curve[1].objective < 1e-8 < curve[0].objective


def test_rank_scan_constant_picks_one():
    data = [np.full(30, 1.3) for _ in range(4)]
    best, curve = rank_scan(data[:2], data[2:], 3, 2)
    assert best == 1
    assert len(curve) == 1


def test_rank_scan_ties_go_to_smallest_rank():
    # AR(2) with a quadratic dictionary: every rank >= 2 is exact, so all tie
    data = list(ar2_family(n=40).values())
    best, curve = rank_scan(data[:3], data[3:], 2, 2)
    exact = [c for c in curve if c.objective < 1e-6]
    assert exact and best == min(c.rank for c in exact)
    assert all(c.objective > curve[best - 1].objective - TIE_TOL for c in curve)


def test_fit_auto_fixed_rank_has_no_curve():
    data = list(ar2_family().values())
    model, curve = fit_auto(data[:3], data[3:], 2, 1, rank=2)
    assert curve == [] and model.rank_used == 2


def test_hankel_rank_scan_runs():
    data = list(ar2_family().values())
    best, curve = rank_scan(data[:3], data[3:], 2, 1, variant=HANKEL)
    assert best == 2


def test_sweep_prefers_smallest_exact_cell():
    data = ar2_family()
    spec = split(list(data), 0)
    res = sweep(data, spec, [2, 3], [1, 2])
    # AR(2) is exact from (tau 2, order 1) on; ties resolve to the smallest model
    assert (res.best.tau, res.best.order, res.best.rank) == (2, 1, 2)
    assert len(res.grid) == 4
    assert res.test_mse_percent < 1e-8


def test_one_cell_sweep_equals_fit_auto():
    data = ar2_family()
    spec = split(list(data), 3)
    res = sweep(data, spec, [3], [2])
    train = [data[i] for i in spec.train_ids]
    val = [data[i] for i in spec.val_ids]
    model, _ = fit_auto(train, val, 3, 2)
    assert res.model.operator.tobytes() == model.operator.tobytes()


def test_sweep_no_test_leakage():
    data = AccessLog(ar2_family(9))
    spec = split(list(data), 0)
    sweep(data, spec, [2, 3], [1, 2])
    test = set(spec.test_ids)
    first = next(i for i, k in enumerate(data.reads) if k in test)
    # test ids are read once each, after everything else
    assert all(k in test for k in data.reads[first:])
    assert sorted(data.reads[first:]) == sorted(test)


def test_sweep_is_reproducible():
    data = ar2_family(6)
    rng = np.random.default_rng(1)
    data = {k: v + 0.01 * rng.normal(size=v.size) for k, v in data.items()}
    spec = split(list(data), 2)
    a = sweep(data, spec, [2, 3], [1, 2])
    b = sweep(data, spec, [2, 3], [1, 2], n_jobs=4)
    assert a.grid == b.grid
    assert a.best == b.best
    assert a.model.operator.tobytes() == b.model.operator.tobytes()
    assert a.test_mse_percent == b.test_mse_percent


def test_enlarging_grid_never_worsens_best():
    rng = np.random.default_rng(4)
    data = {k: v + 0.02 * rng.normal(size=v.size) for k, v in ar2_family(6).items()}
    spec = split(list(data), 0)
    small = sweep(data, spec, [2], [1])
    large = sweep(data, spec, [2, 3], [1, 2])
    assert large.best.objective <= small.best.objective


def test_failed_cells_are_recorded():
    data = {k: v[:8] for k, v in ar2_family().items()}
    spec = split(list(data), 0)
    res = sweep(data, spec, [2, 5], [1])
    bad = [g for g in res.grid if not g.ok]
    assert [(g.tau, g.order) for g in bad] == [(5, 1)]
    assert "series" in bad[0].error
    assert res.best.tau == 2


def test_all_cells_failing_raises():
    data = {k: v[:8] for k, v in ar2_family().items()}
    with pytest.raises(ContractError):
        sweep(data, split(list(data), 0), [5], [1])


def test_sweep_records_variant():
    data = ar2_family()
    res = sweep(data, split(list(data), 0), [2], [1], variant=HANKEL)
    assert res.variant == HANKEL and res.model.variant == HANKEL
    assert sweep(data, split(list(data), 0), [2], [1]).variant == CAUSAL_JUMP
