"""Synthetic Monod growth curves and plate-reader CSV I/O.

The CSV layout is::

    # casein_gL: 30.0,30.0,...      (optional, one value per well)
    # glucose_gL: 75.0,37.5,...     (optional, one value per well)
    time_min,A1,A2,...
    0.0,0.2,0.2,...
    3.0,0.2013,0.2011,...

Times are in minutes and must be uniformly spaced.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ContractError, DataFormatError

META_KEYS = ("casein_gL", "glucose_gL")


@dataclass(frozen=True)
class MonodParams:
    """Single-substrate Monod model ``dN/dt = r_max S N / (K_s + S)``, ``dS/dt = -gamma dN/dt``.

    Time unit is hours; ``gamma`` is substrate (g/L) consumed per unit OD.
    The defaults are the synthetic plate used by the acceptance suite: on
    the 8x12 halving grid they take wells from OD 0.2 to between 0.2 and
    about 0.73 over 27 h. They are a fixture choice, not fitted values.
    """

    r_max: float = 3.0
    K_s: float = 50.0
    gamma: float = 200.0
    N0: float = 0.2
    S0: float = 10.0

    def validate(self):
        for name in ("r_max", "K_s", "gamma", "N0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ContractError(f"MonodParams.{name} must be positive, got {v}")
        if not (math.isfinite(self.S0) and self.S0 >= 0):
            raise ContractError(f"MonodParams.S0 must be non-negative, got {self.S0}")

    @property
    def terminal_population(self) -> float:
        return self.N0 + self.S0 / self.gamma


def _monod_rhs(params: MonodParams, n: float, s: float):
    s = max(s, 0.0)
    dn = params.r_max * s * n / (params.K_s + s)
    return dn, -params.gamma * dn


def simulate_monod(params: MonodParams, dt: float, steps: int, substeps: int = 1,
                   return_substrate: bool = False):
    """Integrate the Monod system with fixed-step classical RK4.

    Returns ``steps + 1`` population samples ``N(0), N(dt), ..., N(steps*dt)``
    (and the matching substrate samples if ``return_substrate``). Substrate
    is floored at zero after every step, with the overshoot removed from N
    so that ``S + gamma N`` stays constant. ``S0 = 0`` is allowed and gives a
    constant population.
    """
    params.validate()
    if not (math.isfinite(dt) and dt > 0):
        raise ContractError(f"dt must be positive, got {dt}")
    if steps < 1 or substeps < 1:
        raise ContractError("steps and substeps must be >= 1")
    h = dt / substeps
    n_out = np.empty(steps + 1)
    s_out = np.empty(steps + 1)
    n, s = float(params.N0), float(params.S0)
    n_out[0], s_out[0] = n, s
    for k in range(1, steps + 1):
        for _ in range(substeps):
            k1n, k1s = _monod_rhs(params, n, s)
            k2n, k2s = _monod_rhs(params, n + 0.5 * h * k1n, s + 0.5 * h * k1s)
            k3n, k3s = _monod_rhs(params, n + 0.5 * h * k2n, s + 0.5 * h * k2s)
            k4n, k4s = _monod_rhs(params, n + h * k3n, s + h * k3s)
            n = n + h / 6.0 * (k1n + 2 * k2n + 2 * k3n + k4n)
            s = s + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
            if s < 0.0:
                # floor the substrate and give back the overshoot so S + gamma N is kept
                n, s = n + s / params.gamma, 0.0
        n_out[k], s_out[k] = n, s
    if return_substrate:
        return n_out, s_out
    return n_out


def default_mapping(base: MonodParams, casein: float, glucose: float) -> MonodParams:
    """Synthetic (casein, glucose) -> Monod parameters.

    Total substrate is ``casein + glucose`` and the growth-rate ceiling is
    damped by glucose availability, ``r_max * G / (G + K_s)``. This is a
    stand-in to exercise the identification pipeline, not a biological model.
    """
    return MonodParams(
        r_max=base.r_max * glucose / (glucose + base.K_s),
        K_s=base.K_s,
        gamma=base.gamma,
        N0=base.N0,
        S0=casein + glucose,
    )


@dataclass
class GrowthDataset:
    """M wells sampled on a shared uniform time grid.

    ``od`` has shape ``(M, N)``. Condition arrays are per well, or None when
    the source file carries no metadata.
    """

    well_ids: list
    od: np.ndarray
    timestep_min: float
    start_min: float = 0.0
    casein_gL: np.ndarray | None = None
    glucose_gL: np.ndarray | None = None

    def __post_init__(self):
        self.od = np.asarray(self.od, dtype=np.float64)
        if self.od.ndim != 2 or self.od.shape[0] != len(self.well_ids):
            raise ContractError("od must have one row per well")
        if len(set(self.well_ids)) != len(self.well_ids):
            raise ContractError("duplicate well ids")
        if not np.all(np.isfinite(self.od)) or np.any(self.od < 0):
            raise ContractError("OD values must be finite and non-negative")
        if not self.timestep_min > 0:
            raise ContractError("timestep must be positive")

    @property
    def n_points(self) -> int:
        return self.od.shape[1]

    @property
    def times_min(self) -> np.ndarray:
        return self.start_min + self.timestep_min * np.arange(self.n_points)

    def series(self, well_id) -> np.ndarray:
        try:
            return self.od[self.well_ids.index(well_id)]
        except ValueError:
            raise KeyError(well_id) from None

    def as_mapping(self) -> dict:
        return {w: self.od[i] for i, w in enumerate(self.well_ids)}

    def subset(self, ids) -> "GrowthDataset":
        idx = [self.well_ids.index(i) for i in ids]
        pick = lambda a: None if a is None else np.asarray(a)[idx]
        return GrowthDataset([self.well_ids[i] for i in idx], self.od[idx], self.timestep_min,
                             self.start_min, pick(self.casein_gL), pick(self.glucose_gL))


def plate_well_ids(rows: int, cols: int) -> list[str]:
    letters = [chr(ord("A") + i) if i < 26 else f"R{i + 1}" for i in range(rows)]
    return [f"{letters[r]}{c + 1}" for r in range(rows) for c in range(cols)]


def halving_grid(rows: int, cols: int, casein_max: float = 30.0, glucose_max: float = 75.0):
    """Two-dimensional serial dilution: casein halves down rows, glucose halves across columns.

    Returns ``(casein, glucose)`` arrays in row-major well order.
    """
    if rows < 1 or cols < 1:
        raise ContractError("grid must be at least 1x1")
    c = casein_max / 2.0 ** np.arange(rows)
    g = glucose_max / 2.0 ** np.arange(cols)
    cc, gg = np.meshgrid(c, g, indexing="ij")
    return cc.ravel(), gg.ravel()


def generate_condition_family(base: MonodParams, conditions, dt_min: float, steps: int,
                              mapping: Callable = default_mapping, noise_std: float = 0.0,
                              seed: int | None = None, well_ids=None, substeps: int = 1) -> GrowthDataset:
    """Simulate one growth curve per (casein, glucose) condition.

    ``noise_std`` adds zero-mean Gaussian noise (OD units) with a per-well
    seed derived from ``seed``; noisy values are clipped at zero.
    """
    conditions = [(float(c), float(g)) for c, g in conditions]
    if not conditions:
        raise ContractError("condition grid is empty")
    if noise_std < 0:
        raise ContractError("noise_std must be non-negative")
    dt_h = dt_min / 60.0
    od = np.stack([
        simulate_monod(mapping(base, c, g), dt_h, steps, substeps=substeps) for c, g in conditions
    ])
    if noise_std > 0:
        for i in range(od.shape[0]):
            rng = np.random.default_rng([0 if seed is None else seed, i])
            od[i] = np.clip(od[i] + rng.normal(0.0, noise_std, od.shape[1]), 0.0, None)
    ids = list(well_ids) if well_ids is not None else [f"W{i + 1}" for i in range(len(conditions))]
    casein = np.array([c for c, _ in conditions])
    glucose = np.array([g for _, g in conditions])
    return GrowthDataset(ids, od, float(dt_min), 0.0, casein, glucose)


def simulate_plate(rows: int = 8, cols: int = 12, hours: float = 27.0, dt_min: float = 3.0,
                   base: MonodParams = MonodParams(), casein_max: float = 30.0,
                   glucose_max: float = 75.0, noise_frac: float = 0.0, seed: int = 0,
                   mapping: Callable = default_mapping) -> GrowthDataset:
    """A halving-grid plate.

    ``noise_frac`` sets the additive noise standard deviation relative to the
    root-mean-square OD of the clean plate (one shared std for all wells).
    """
    if not (math.isfinite(dt_min) and dt_min > 0):
        raise ContractError(f"dt_min must be positive, got {dt_min}")
    if not (math.isfinite(hours) and hours > 0):
        raise ContractError(f"hours must be positive, got {hours}")
    steps = int(round(hours * 60.0 / dt_min))
    casein, glucose = halving_grid(rows, cols, casein_max, glucose_max)
    conds = list(zip(casein, glucose))
    ids = plate_well_ids(rows, cols)
    clean = generate_condition_family(base, conds, dt_min, steps, mapping, well_ids=ids)
    if noise_frac <= 0:
        return clean
    return generate_condition_family(base, conds, dt_min, steps, mapping,
                                     noise_std=noise_frac * float(np.sqrt(np.mean(clean.od**2))),
                                     seed=seed, well_ids=ids)


def _float_cell(text: str, row: int, col: int) -> float:
    t = text.strip()
    if not t:
        raise DataFormatError("missing value", row, col)
    try:
        v = float(t)
    except ValueError:
        raise DataFormatError(f"non-numeric cell {t!r}", row, col) from None
    if not math.isfinite(v):
        raise DataFormatError(f"non-finite cell {t!r}", row, col)
    return v


def load_plate_csv(path, rel_tol: float = 1e-6) -> GrowthDataset:
    path = Path(path)
    meta = {}
    header = None
    header_row = 0
    data = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if line.lstrip().startswith("#"):
                body = line.lstrip()[1:]
                key, sep, value = body.partition(":")
                key = key.strip()
                if sep and key in META_KEYS:
                    meta[key] = (lineno, next(csv.reader([value])))
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header, header_row = [c.strip() for c in cells], lineno
                if len(header) < 2 or header[0].lower() != "time_min":
                    raise DataFormatError("header must be 'time_min,<well ids...>'", lineno, 1)
                continue
            if len(cells) != len(header):
                raise DataFormatError(
                    f"expected {len(header)} cells, found {len(cells)}", lineno,
                    min(len(cells), len(header)) + 1)
            data.append([_float_cell(c, lineno, j + 1) for j, c in enumerate(cells)])
    if header is None:
        raise DataFormatError("no header row found")
    if not data:
        raise DataFormatError("no data rows", header_row + 1)
    arr = np.array(data)
    times = arr[:, 0]
    n_wells = len(header) - 1
    if len(times) > 1:
        steps = np.diff(times)
        dt = steps[0]
        if dt <= 0:
            raise DataFormatError("time must increase", header_row + 2, 1)
        bad = np.flatnonzero(np.abs(steps - dt) > rel_tol * abs(dt))
        if bad.size:
            raise DataFormatError("non-uniform timestep", header_row + 2 + int(bad[0]), 1)
    else:
        dt = 1.0
    if np.any(arr[:, 1:] < 0):
        r, c = np.argwhere(arr[:, 1:] < 0)[0]
        raise DataFormatError("negative OD value", header_row + 1 + int(r), int(c) + 2)
    conds = {}
    for key in META_KEYS:
        if key in meta:
            lineno, values = meta[key]
            if len(values) != n_wells:
                raise DataFormatError(f"{key} needs {n_wells} values, found {len(values)}", lineno)
            conds[key] = np.array([_float_cell(v, lineno, j + 1) for j, v in enumerate(values)])
    return GrowthDataset(header[1:], arr[:, 1:].T.copy(), float(dt), float(times[0]),
                         conds.get("casein_gL"), conds.get("glucose_gL"))


def write_plate_csv(dataset: GrowthDataset, path, header_lines=()) -> None:
    """Write the canonical CSV layout; floats use ``repr`` so loading is exact.

    ``header_lines`` are written first as ``# `` comments, which the loader skips.
    """
    fmt = lambda v: repr(float(v))
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        if dataset.casein_gL is not None:
            fh.write("# casein_gL: " + ",".join(fmt(v) for v in dataset.casein_gL) + "\n")
        if dataset.glucose_gL is not None:
            fh.write("# glucose_gL: " + ",".join(fmt(v) for v in dataset.glucose_gL) + "\n")
        fh.write("time_min," + ",".join(dataset.well_ids) + "\n")
        for j, t in enumerate(dataset.times_min):
            fh.write(fmt(t) + "," + ",".join(fmt(v) for v in dataset.od[:, j]) + "\n")
