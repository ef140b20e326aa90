"""Train/validation/test splits and the (tau, order, rank) model sweep.

A model is scored by the sum of the train and validation normalized MSE
of free-running forecasts from each series' first window. The test split
is only read once the best cell is fixed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .dictionary import build_dictionary
from .dmd import CAUSAL_JUMP, HANKEL, KoopmanModel, fit_causal_jump, fit_hankel_dmd, residual
from .embedding import as_series_set, shift1_pair, tau_jump_pair
from .errors import CJDMDError, ContractError, NumericalError
from .forecast import evaluate, normalize_series

log = logging.getLogger(__name__)

# objectives (in percent) closer than this are treated as ties
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SplitSpec:
    train_ids: list
    val_ids: list
    test_ids: list
    seed: int


@dataclass(frozen=True)
class RankPoint:
    rank: int
    train_mse: float
    val_mse: float
    training_residual: float

    @property
    def objective(self) -> float:
        return self.train_mse + self.val_mse


@dataclass(frozen=True)
class GridCell:
    tau: int
    order: int
    rank: int | None
    train_mse: float
    val_mse: float
    error: str | None = None

    @property
    def objective(self) -> float:
        return self.train_mse + self.val_mse

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepResult:
    grid: list
    best: GridCell
    model: KoopmanModel
    test_mse_percent: float | None
    split: SplitSpec
    variant: str = CAUSAL_JUMP
    curves: dict = field(default_factory=dict, repr=False)


def split(dataset_ids, seed: int) -> SplitSpec:
    """Shuffle ids with ``seed`` and cut into thirds; the remainder goes to train, then val."""
    ids = list(dataset_ids)
    if len(ids) < 3:
        raise ContractError(f"need at least 3 datasets to split, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ContractError("dataset ids must be unique")
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    base, rem = divmod(len(ids), 3)
    n_train = base + (1 if rem >= 1 else 0)
    n_val = base + (1 if rem >= 2 else 0)
    return SplitSpec(shuffled[:n_train], shuffled[n_train:n_train + n_val],
                     shuffled[n_train + n_val:], seed)


def _fit(series, tau, order, rank, variant, scale):
    d = build_dictionary(series[0].shape[1] * tau, order)
    if variant == CAUSAL_JUMP:
        return fit_causal_jump(series, tau, d, rank, scale=scale)
    return fit_hankel_dmd(series, tau, d, rank, scale=scale)


def _score(model, series, relift: bool = True) -> float:
    try:
        return evaluate(model, series, relift=relift).normalized_mse_percent
    except NumericalError:
        return math.inf


def _finite_or_inf(v: float) -> float:
    return v if math.isfinite(v) else math.inf


def rank_scan(series_train, series_val, tau: int, n_o: int, variant: str = CAUSAL_JUMP,
              scale: float | None = None, max_rank: int | None = None, relift: bool = True):
    """Score every truncation rank from 1 to the effective rank.

    Returns ``(best_rank, curve)`` where ``curve`` is a list of
    :class:`RankPoint`. Ties (within ``TIE_TOL``) go to the smallest rank.
    The SVD of the training snapshots is computed once and reused.
    """
    train = as_series_set(series_train)
    val = as_series_set(series_val)
    if scale is None:
        scale = normalize_series(train)[1]
    scaled = [s / scale for s in train]
    p = train[0].shape[1]
    d = build_dictionary(p * tau, n_o)
    if variant == CAUSAL_JUMP:
        pair = tau_jump_pair(scaled, tau, d)
    elif variant == HANKEL:
        d = d.per_lag(p)
        pair = shift1_pair(scaled, tau, d)
    else:
        raise ContractError(f"unknown variant {variant!r}")
    factors = linalg.svd(pair.past)
    top = factors.effective_rank()
    if top == 0:
        raise linalg.DegenerateInputError("training snapshots are identically zero")
    if max_rank is not None:
        top = min(top, max_rank)
    curve = []
    for r in range(1, top + 1):
        k = linalg.pinv_from_factors(pair.future, factors, r)
        model = KoopmanModel(k, d, tau, p, r, variant, residual(k, pair.past, pair.future), float(scale))
        curve.append(RankPoint(r, _finite_or_inf(_score(model, train, relift)),
                               _finite_or_inf(_score(model, val, relift)), model.training_residual))
    best = _argmin(curve, key=lambda c: c.objective, tiebreak=lambda c: c.rank)
    return best.rank, curve


def _argmin(items, key, tiebreak):
    values = [key(i) for i in items]
    lo = min(values)
    if not math.isfinite(lo):
        return min(items, key=tiebreak)
    tied = [i for i, v in zip(items, values) if v <= lo + TIE_TOL]
    return min(tied, key=tiebreak)


def fit_auto(series_train, series_val, tau: int, n_o: int, variant: str = CAUSAL_JUMP,
             rank: int | str = "auto", scale: float | None = None, relift: bool = True):
    """Fit one (tau, order) cell, picking the rank by :func:`rank_scan` when ``rank == "auto"``.

    Returns ``(model, curve)``; ``curve`` is empty for a fixed rank.
    """
    train = as_series_set(series_train)
    if scale is None:
        scale = normalize_series(train)[1]
    curve = []
    if rank == "auto":
        rank, curve = rank_scan(train, series_val, tau, n_o, variant, scale, relift=relift)
    return _fit(train, tau, n_o, int(rank), variant, scale), curve


def _run_cell(train, val, tau, order, variant, scale, relift):
    try:
        model, curve = fit_auto(train, val, tau, order, variant, "auto", scale, relift)
    except CJDMDError as exc:
        log.info("grid cell tau=%d order=%d failed: %s", tau, order, exc)
        return GridCell(tau, order, None, math.inf, math.inf, str(exc)), None, []
    pt = next(c for c in curve if c.rank == model.rank_used) if curve else None
    if pt is None:
        return GridCell(tau, order, model.rank_used, math.inf, math.inf, "no rank evaluated"), None, curve
    return GridCell(tau, order, model.rank_used, pt.train_mse, pt.val_mse), model, curve


def sweep(series_set, split_spec: SplitSpec, tau_range, order_range, variant: str = CAUSAL_JUMP,
          n_jobs: int = 1, relift: bool = True) -> SweepResult:
    """Evaluate every (tau, order) cell and keep the best by train + val MSE.

    ``series_set`` maps dataset id to series. Cells that fail (e.g. series
    too short for tau) are recorded with ``error`` set. Ties go to smaller
    order, then smaller tau, then smaller rank.
    """
    taus, orders = list(tau_range), list(order_range)
    if not taus or not orders:
        raise ContractError("tau_range and order_range must be non-empty")
    train = [series_set[i] for i in split_spec.train_ids]
    val = [series_set[i] for i in split_spec.val_ids]
    scale = normalize_series(train)[1]
    cells = [(t, o) for t in taus for o in orders]
    run = lambda c: _run_cell(train, val, c[0], c[1], variant, scale, relift)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    grid = [r[0] for r in results]
    ok = [i for i, g in enumerate(grid) if g.ok]
    if not ok:
        raise ContractError("every grid cell failed: " + "; ".join(g.error for g in grid))
    best_i = _argmin(ok, key=lambda i: grid[i].objective,
                     tiebreak=lambda i: (grid[i].order, grid[i].tau, grid[i].rank))
    best, model = grid[best_i], results[best_i][1]
    test = [series_set[i] for i in split_spec.test_ids]
    test_mse = _score(model, test, relift) if test else None
    curves = {(g.tau, g.order): r[2] for g, r in zip(grid, results)}
    return SweepResult(grid, best, model, test_mse, split_spec, variant, curves)
