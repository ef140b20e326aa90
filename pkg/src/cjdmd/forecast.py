"""Free-running rollout forecasts and normalized MSE."""

import math
from dataclasses import dataclass

import numpy as np

from .dmd import CAUSAL_JUMP, KoopmanModel, extract_predictor
from .embedding import as_series
from .errors import ContractError, DegenerateInputError, DivergenceError, UndefinedMetricError


@dataclass(frozen=True)
class Forecast:
    initial_window: np.ndarray
    predicted: np.ndarray
    horizon: int
    model_ref: str = ""


@dataclass(frozen=True)
class ErrorReport:
    normalized_mse_percent: float
    per_series: list
    horizon: int


def rollout_batch(model: KoopmanModel, windows, horizon: int, relift: bool = True) -> np.ndarray:
    """Roll out many initial windows at once.

    ``windows`` has shape ``(B, p * tau)`` (oldest sample first) in the
    original, unscaled units. Returns predictions of shape ``(B, horizon, p)``.

    With ``relift`` the observables are recomputed from the predicted window
    at every step. Otherwise the full observable vector is propagated by
    ``K`` and the window is read off its state-inclusive block.
    """
    if horizon < 1:
        raise ContractError("horizon must be >= 1")
    w = np.array(windows, dtype=np.float64, ndmin=2)
    p, wd = model.output_dim, model.window_dim
    if w.shape[1] != wd:
        raise ContractError(f"initial window must have {wd} entries, got {w.shape[1]}")
    if not np.all(np.isfinite(w)):
        raise ContractError("initial window contains non-finite entries")
    w = w / model.scale
    b = w.shape[0]
    k = model.operator
    rows = extract_predictor(model).rows
    advance = model.advance
    n_steps = math.ceil(horizon / advance)
    out = np.empty((b, n_steps * advance, p))
    lifted = model.dictionary.lift(w)
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            if relift:
                new = lifted @ rows.T
            else:
                lifted = lifted @ k.T
                new = lifted[:, wd - advance * p: wd]
            if not np.all(np.isfinite(new)):
                raise DivergenceError(step)
            out[:, step * advance:(step + 1) * advance] = new.reshape(b, advance, p)
            if model.variant == CAUSAL_JUMP:
                w = new
            else:
                w = np.concatenate([w[:, p:], new], axis=1)
            if relift:
                lifted = model.dictionary.lift(w)
                if not np.all(np.isfinite(lifted)):
                    raise DivergenceError(step + 1)
    return out[:, :horizon] * model.scale


def rollout(model: KoopmanModel, initial_window, horizon: int, relift: bool = True) -> Forecast:
    window = np.asarray(initial_window, dtype=np.float64).ravel()
    pred = rollout_batch(model, window[None, :], horizon, relift)[0]
    if model.output_dim == 1:
        pred = pred[:, 0]
    return Forecast(window, pred, horizon, model.meta.get("id", model.variant))


def normalized_mse(predicted, truth) -> float:
    """``100 * mean((pred - truth)**2) / mean(truth**2)``.

    0 is a perfect forecast and 100 is as bad as predicting zero.
    """
    yh = np.asarray(predicted, dtype=np.float64)
    y = np.asarray(truth, dtype=np.float64)
    if yh.shape != y.shape or y.size < 1:
        raise ContractError(f"shape mismatch: {yh.shape} vs {y.shape}")
    energy = np.mean(y**2)
    if energy == 0:
        raise UndefinedMetricError("truth is identically zero")
    with np.errstate(over="ignore", invalid="ignore"):
        return float(100.0 * np.mean((yh - y) ** 2) / energy)


def forecast_series(model: KoopmanModel, series_set, horizon: int | None = None,
                    relift: bool = True) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Forecast each series from its first window; returns (predictions, truths).

    The default horizon is everything after the initial window.
    """
    series = [as_series(s) for s in series_set]
    tau = model.tau
    n = min(s.shape[0] for s in series)
    if n <= tau:
        raise ContractError(f"series need more than tau={tau} samples to evaluate")
    h = n - tau if horizon is None else horizon
    if h > n - tau:
        raise ContractError(f"horizon {h} exceeds available truth ({n - tau} samples)")
    windows = np.stack([s[:tau].ravel() for s in series])
    pred = rollout_batch(model, windows, h, relift)
    truths = [s[tau:tau + h] for s in series]
    return [pred[i] for i in range(len(series))], truths


def evaluate(model: KoopmanModel, series_set, ids=None, horizon: int | None = None,
             relift: bool = True) -> ErrorReport:
    """Normalized MSE of free-running forecasts, per series and aggregated.

    The aggregate is the point-count weighted mean of per-series values.
    """
    series_set = list(series_set)
    ids = list(ids) if ids is not None else list(range(len(series_set)))
    preds, truths = forecast_series(model, series_set, horizon, relift)
    per = [(i, normalized_mse(p, t)) for i, p, t in zip(ids, preds, truths)]
    weights = np.array([t.size for t in truths], dtype=np.float64)
    values = np.array([v for _, v in per])
    agg = float(np.sum(weights * values) / np.sum(weights))
    return ErrorReport(agg, per, truths[0].shape[0])


def normalize_series(series_set) -> tuple[list[np.ndarray], float]:
    """Divide every series by the largest absolute value in the whole set."""
    series = [np.asarray(s, dtype=np.float64) for s in series_set]
    if not series or all(s.size == 0 for s in series):
        raise ContractError("series set is empty")
    scale = max(float(np.max(np.abs(s))) for s in series if s.size)
    if scale == 0 or not np.isfinite(scale):
        raise DegenerateInputError("cannot normalize an all-zero (or non-finite) dataset")
    return [s / scale for s in series], scale


def denormalize_series(series_set, scale: float) -> list[np.ndarray]:
    return [np.asarray(s, dtype=np.float64) * scale for s in series_set]


def write_forecast_table(path, predicted, truth=None, start_index: int = 0,
                         time_min=None, header_lines=()) -> None:
    """Tab-separated table: index, time_min, truth, prediction (one row per step).

    Missing (non-finite) truth values are left blank.
    """
    pred = np.asarray(predicted, dtype=np.float64).ravel()
    tr = None if truth is None else np.asarray(truth, dtype=np.float64).ravel()
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("index\ttime_min\ttruth\tprediction\n")
        for i, v in enumerate(pred):
            t = "" if time_min is None else repr(float(time_min[i]))
            y = "" if tr is None or not np.isfinite(tr[i]) else repr(float(tr[i]))
            fh.write(f"{start_index + i}\t{t}\t{y}\t{float(v)!r}\n")
