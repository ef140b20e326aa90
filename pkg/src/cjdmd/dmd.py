"""Hankel DMD and causal-jump extended DMD fitters.

Both fitters lift delay windows through a state-inclusive monomial
dictionary and solve ``min_K ||Psi_f - K Psi_p||_F`` with a truncated
pseudoinverse. They differ in two ways:

* Hankel DMD pairs each window with the next one (shift 1) and, by default,
  only uses monomials of a single lag, so its output predictor is additive
  across lags.
* Causal-jump DMD pairs windows ``tau`` samples apart, so past and future
  windows never share a sample, and uses the full window dictionary
  including cross-lag products.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .dictionary import ObservableDictionary
from .embedding import as_series_set, shift1_pair, tau_jump_pair
from .errors import ContractError, ModelFileError, ModelVersionError

HANKEL = "hankel-shift1"
CAUSAL_JUMP = "causal-jump"
VARIANTS = (HANKEL, CAUSAL_JUMP)

FILE_FORMAT = "cjdmd-model"
FILE_VERSION = 1


@dataclass(frozen=True)
class KoopmanModel:
    operator: np.ndarray
    dictionary: ObservableDictionary
    tau: int
    output_dim: int
    rank_used: int
    variant: str
    training_residual: float = 0.0
    # series were divided by this before lifting; rollout applies the same scaling
    scale: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        k = self.operator
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] != self.dictionary.size:
            raise ContractError(
                f"operator shape {k.shape} does not match dictionary size {self.dictionary.size}"
            )
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown variant {self.variant!r}")
        if self.dictionary.window_dim != self.output_dim * self.tau:
            raise ContractError("dictionary window_dim must equal output_dim * tau")
        if not 0 <= self.rank_used <= k.shape[0]:
            raise ContractError("rank_used out of range")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ContractError("scale must be positive and finite")

    @property
    def window_dim(self) -> int:
        return self.output_dim * self.tau

    @property
    def advance(self) -> int:
        """Samples gained per application of the operator."""
        return self.tau if self.variant == CAUSAL_JUMP else 1


@dataclass(frozen=True)
class PredictorRows:
    """Rows of ``K`` that map ``psi(window)`` to newly predicted samples.

    ``rows @ psi(window)`` gives the ``advance`` newest samples of the next
    window, flattened oldest first.
    """

    rows: np.ndarray
    advance: int
    output_dim: int

    def __call__(self, lifted: np.ndarray) -> np.ndarray:
        return lifted @ self.rows.T


def _scaled(series_set, scale: float):
    if not (np.isfinite(scale) and scale > 0):
        raise ContractError("scale must be positive and finite")
    return [s / scale for s in as_series_set(series_set)]


def _solve(pair, rank: int):
    return linalg.truncated_pinv_fit(pair.past, pair.future, rank)


def residual(k: np.ndarray, past: np.ndarray, future: np.ndarray) -> float:
    """``||future - K past||_F / ||future||_F``."""
    denom = np.linalg.norm(future)
    r = np.linalg.norm(future - k @ past)
    return float(r / denom) if denom > 0 else float(r)


def fit_hankel_dmd(series_set, tau: int, dictionary: ObservableDictionary, rank: int,
                   per_lag: bool = True, scale: float = 1.0) -> KoopmanModel:
    """Shift-1 DMD on delay windows.

    With ``per_lag`` (the default) the dictionary is first restricted to
    monomials of a single lag, which is the classic Hankel DMD lifting.
    ``per_lag=False`` keeps cross-lag monomials and gives the non-causal
    one-step EDMD model on full windows.
    """
    series = _scaled(series_set, scale)
    p = series[0].shape[1]
    if per_lag and dictionary.block_dim != p:
        dictionary = dictionary.per_lag(p)
    pair = shift1_pair(series, tau, dictionary)
    k, r = _solve(pair, rank)
    return KoopmanModel(k, dictionary, tau, p, r, HANKEL,
                        residual(k, pair.past, pair.future), float(scale))


def fit_causal_jump(series_set, tau: int, dictionary: ObservableDictionary, rank: int,
                    scale: float = 1.0) -> KoopmanModel:
    series = _scaled(series_set, scale)
    p = series[0].shape[1]
    pair = tau_jump_pair(series, tau, dictionary)
    k, r = _solve(pair, rank)
    return KoopmanModel(k, dictionary, tau, p, r, CAUSAL_JUMP,
                        residual(k, pair.past, pair.future), float(scale))


def extract_predictor(model: KoopmanModel) -> PredictorRows:
    wd = model.window_dim
    if model.variant == CAUSAL_JUMP:
        rows = model.operator[:wd]
    else:
        # newest sample of the next window
        rows = model.operator[wd - model.output_dim: wd]
    return PredictorRows(rows.copy(), model.advance, model.output_dim)


def lag_coefficients(model: KoopmanModel) -> np.ndarray:
    """Hankel predictor split into per-lag coefficient blocks.

    For a per-lag dictionary with ``p == 1`` returns an array of shape
    ``(tau, max_order)`` whose entry ``[i, d-1]`` multiplies ``y_i ** d``
    (lag ``i`` counted from the oldest sample of the window).
    """
    d = model.dictionary
    if model.output_dim != 1 or d.block_dim != 1:
        raise ContractError("lag coefficients need a per-lag dictionary with p == 1")
    row = extract_predictor(model).rows[0]
    out = np.zeros((model.tau, d.max_order))
    for coef, e in zip(row, d.table):
        lag = int(np.flatnonzero(e)[0])
        out[lag, e[lag] - 1] = coef
    return out


def save_model(model: KoopmanModel, path) -> None:
    """Write a model as versioned JSON.

    Floats are written with ``repr`` so every operator entry round-trips
    bit-exactly.
    """
    doc = {
        "format": FILE_FORMAT,
        "version": FILE_VERSION,
        "variant": model.variant,
        "tau": model.tau,
        "output_dim": model.output_dim,
        "rank_used": model.rank_used,
        "scale": model.scale,
        "training_residual": model.training_residual,
        "dictionary": model.dictionary.to_dict(),
        "operator": {
            "shape": list(model.operator.shape),
            "data": model.operator.ravel().tolist(),
        },
        "meta": model.meta,
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_model(path) -> KoopmanModel:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(
            f"{path}: malformed model file at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or doc.get("format") != FILE_FORMAT:
        raise ModelFileError(f"{path}: not a {FILE_FORMAT} file")
    if doc.get("version") != FILE_VERSION:
        raise ModelVersionError(
            f"{path}: unsupported model file version {doc.get('version')!r} (expected {FILE_VERSION})"
        )
    try:
        dictionary = ObservableDictionary.from_dict(doc["dictionary"])
        shape = tuple(int(v) for v in doc["operator"]["shape"])
        data = np.array(doc["operator"]["data"], dtype=np.float64)
        if len(shape) != 2 or data.size != shape[0] * shape[1]:
            raise ModelFileError(f"{path}: operator data does not match shape {shape}")
        return KoopmanModel(
            operator=data.reshape(shape),
            dictionary=dictionary,
            tau=int(doc["tau"]),
            output_dim=int(doc["output_dim"]),
            rank_used=int(doc["rank_used"]),
            variant=doc["variant"],
            training_residual=float(doc["training_residual"]),
            scale=float(doc["scale"]),
            meta=doc.get("meta") or {},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: invalid model file: {exc}") from exc
