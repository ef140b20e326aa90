"""Delay windows and paired snapshot matrices.

Window ``j`` (0-based here) of a series holds samples ``y[j], ..., y[j+tau-1]``,
flattened oldest first, so it has ``p * tau`` entries for ``p`` outputs.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dictionary import ObservableDictionary
from .errors import ContractError, InsufficientDataError

SHIFT1 = "shift-1"
TAU_JUMP = "tau-jump"


@dataclass(frozen=True)
class DelayWindow:
    values: np.ndarray
    start_index: int


@dataclass(frozen=True)
class SnapshotPair:
    """Lifted past/future snapshots, one column per training pair.

    ``past_start[c]`` is the start index (within its own series) of the past
    window of column ``c``; the future window starts ``offset`` samples later.
    """

    past: np.ndarray
    future: np.ndarray
    pairing: str
    offset: int
    tau: int
    source_boundaries: tuple
    past_start: np.ndarray

    @property
    def n_columns(self) -> int:
        return self.past.shape[1]

    def series_of_column(self, c: int) -> int:
        for i, (lo, hi) in enumerate(self.source_boundaries):
            if lo <= c < hi:
                return i
        raise IndexError(c)


def as_series(y) -> np.ndarray:
    """Coerce a series to shape ``(N, p)``."""
    a = np.asarray(y, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ContractError(f"series must be 1-D or (N, p), got shape {np.shape(y)}")
    return a


def as_series_set(series_set) -> list[np.ndarray]:
    if isinstance(series_set, np.ndarray) and series_set.ndim == 1:
        series_set = [series_set]
    out = [as_series(s) for s in series_set]
    if not out:
        raise ContractError("series set is empty")
    p = out[0].shape[1]
    if any(s.shape[1] != p for s in out):
        raise ContractError("all series must share the output dimension")
    return out


def window_matrix(series, tau: int) -> np.ndarray:
    """All delay windows of a series as rows, shape ``(N - tau + 1, p * tau)``."""
    y = as_series(series)
    n, p = y.shape
    if tau < 1:
        raise ContractError("tau must be >= 1")
    if n < tau:
        raise InsufficientDataError(f"series of length {n} is shorter than tau={tau}")
    # (N-tau+1, p, tau) -> (N-tau+1, tau, p) -> flatten oldest first
    w = sliding_window_view(y, tau, axis=0).transpose(0, 2, 1)
    return np.ascontiguousarray(w.reshape(n - tau + 1, p * tau))


def delay_windows(series, tau: int) -> list[DelayWindow]:
    w = window_matrix(series, tau)
    return [DelayWindow(row, j) for j, row in enumerate(w)]


def _pair(series_set, tau: int, dictionary: ObservableDictionary, offset: int, pairing: str):
    series = as_series_set(series_set)
    p = series[0].shape[1]
    if dictionary.window_dim != p * tau:
        raise ContractError(
            f"dictionary window_dim {dictionary.window_dim} != p*tau = {p * tau}"
        )
    need = tau + offset
    for i, s in enumerate(series):
        if s.shape[0] < need:
            raise InsufficientDataError(
                f"series {i} has {s.shape[0]} samples; {pairing} pairing with tau={tau} needs {need}"
            )
    pasts, futures, starts, bounds = [], [], [], []
    col = 0
    for s in series:
        psi = dictionary.lift(window_matrix(s, tau))
        m = psi.shape[0] - offset
        pasts.append(psi[:m])
        futures.append(psi[offset:])
        starts.append(np.arange(m))
        bounds.append((col, col + m))
        col += m
    return SnapshotPair(
        past=np.concatenate(pasts).T.copy(),
        future=np.concatenate(futures).T.copy(),
        pairing=pairing,
        offset=offset,
        tau=tau,
        source_boundaries=tuple(bounds),
        past_start=np.concatenate(starts),
    )


def shift1_pair(series_set, tau: int, dictionary: ObservableDictionary) -> SnapshotPair:
    """Pair each window with the window one sample later (overlapping in ``tau - 1`` samples)."""
    return _pair(series_set, tau, dictionary, 1, SHIFT1)


def tau_jump_pair(series_set, tau: int, dictionary: ObservableDictionary) -> SnapshotPair:
    """Pair each window with the window ``tau`` samples later; the two share no sample."""
    return _pair(series_set, tau, dictionary, tau, TAU_JUMP)
