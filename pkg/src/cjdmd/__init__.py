"""Koopman models of nonlinear autoregressive series via causal-jump and Hankel DMD."""

from .data import GrowthDataset, MonodParams, load_plate_csv, simulate_monod, simulate_plate, write_plate_csv
from .dictionary import ObservableDictionary, build_dictionary, evaluate
from .dmd import (
    CAUSAL_JUMP,
    HANKEL,
    KoopmanModel,
    extract_predictor,
    fit_causal_jump,
    fit_hankel_dmd,
    load_model,
    save_model,
)
from .embedding import delay_windows, shift1_pair, tau_jump_pair
from .forecast import evaluate as evaluate_forecast
from .forecast import normalize_series, normalized_mse, rollout
from .linalg import svd, truncated_pinv_solve
from .selection import fit_auto, rank_scan, split, sweep

__version__ = "0.1.0"
