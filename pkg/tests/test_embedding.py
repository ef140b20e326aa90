import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cjdmd.dictionary import build_dictionary
from cjdmd.embedding import delay_windows, shift1_pair, tau_jump_pair, window_matrix
from cjdmd.errors import InsufficientDataError


def identity(tau):
    return build_dictionary(tau, 1)


def test_delay_windows_small():
    w = delay_windows([1, 2, 3, 4, 5], 2)
    assert [list(x.values) for x in w] == [[1, 2], [2, 3], [3, 4], [4, 5]]
    assert [x.start_index for x in w] == [0, 1, 2, 3]


def test_delay_windows_degenerate():
    w = delay_windows([7.0], 1)
    assert len(w) == 1 and list(w[0].values) == [7.0]


def test_delay_windows_count():
    y = np.arange(547.0)
    w = window_matrix(y, 9)
    assert w.shape == (539, 9)
    np.testing.assert_array_equal(w[0], y[:9])


def test_delay_windows_too_short():
    with pytest.raises(InsufficientDataError):
        delay_windows([1.0, 2.0], 3)


def test_multi_output_window_layout():
    y = np.array([[1, 10], [2, 20], [3, 30]], dtype=float)
    np.testing.assert_array_equal(window_matrix(y, 2), [[1, 10, 2, 20], [2, 20, 3, 30]])


def test_shift1_tau1():
    pair = shift1_pair([np.array([1.0, 2.0, 3.0])], 1, identity(1))
    np.testing.assert_array_equal(pair.past, [[1, 2]])
    np.testing.assert_array_equal(pair.future, [[2, 3]])


def test_shift1_tau2():
    pair = shift1_pair([np.array([1.0, 2.0, 3.0, 4.0])], 2, identity(2))
    np.testing.assert_array_equal(pair.past.T, [[1, 2], [2, 3]])
    np.testing.assert_array_equal(pair.future.T, [[2, 3], [3, 4]])


def test_shift1_two_series_no_crossing():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=10), rng.normal(size=12)
    pair = shift1_pair([a, b], 3, build_dictionary(3, 2))
    assert pair.n_columns == 7 + 9
    assert pair.source_boundaries == ((0, 7), (7, 16))
    # column 6 is the last of series a: future window ends at a[-1]
    np.testing.assert_array_equal(pair.future[:3, 6], a[-3:])
    np.testing.assert_array_equal(pair.past[:3, 7], b[:3])


def test_tau_jump_small():
    pair = tau_jump_pair([np.arange(1.0, 7.0)], 2, identity(2))
    np.testing.assert_array_equal(pair.past.T, [[1, 2], [2, 3], [3, 4]])
    np.testing.assert_array_equal(pair.future.T, [[3, 4], [4, 5], [5, 6]])


def test_tau_jump_minimal():
    pair = tau_jump_pair([np.arange(1.0, 5.0)], 2, identity(2))
    np.testing.assert_array_equal(pair.past.T, [[1, 2]])
    np.testing.assert_array_equal(pair.future.T, [[3, 4]])


def test_tau_jump_count():
    # N - 2*tau + 1 pairs per series
    pair = tau_jump_pair([np.linspace(0.1, 1, 547)], 9, identity(9))
    assert pair.n_columns == 547 - 18 + 1


def test_tau_jump_too_short_names_series():
    with pytest.raises(InsufficientDataError, match="series 1"):
        tau_jump_pair([np.ones(8), np.ones(5)], 3, identity(3))


@settings(max_examples=60, deadline=None)
@given(lengths=st.lists(st.integers(1, 40), min_size=1, max_size=4), tau=st.integers(1, 6))
def test_column_counts_and_sample_sets(lengths, tau):
    series = [np.arange(n, dtype=float) + 1000 * i for i, n in enumerate(lengths)]
    d = identity(tau)
    if min(lengths) >= tau + 1:
        p1 = shift1_pair(series, tau, d)
        assert p1.n_columns == sum(n - tau for n in lengths)
        for c in range(p1.n_columns):
            past, fut = set(p1.past[:, c]), set(p1.future[:, c])
            assert len(past & fut) == tau - 1
            assert len({int(v) // 1000 for v in past | fut}) == 1
    if min(lengths) >= 2 * tau:
        pj = tau_jump_pair(series, tau, d)
        assert pj.n_columns == sum(n - 2 * tau + 1 for n in lengths)
        for c in range(pj.n_columns):
            past, fut = set(pj.past[:, c]), set(pj.future[:, c])
            assert not past & fut
            assert max(past) < min(fut)
            assert len({int(v) // 1000 for v in past | fut}) == 1
