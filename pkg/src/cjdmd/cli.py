"""Command-line front end: ``simulate``, ``fit``, ``sweep``, ``forecast``.

Every option can also come from a ``--config`` file of ``key = value``
lines. Precedence is flags > file > defaults, and the resolved config is
echoed as ``# key = value`` lines at the top of every output.

Exit codes: 0 ok, 2 usage, 3 data, 4 numerical, 5 I/O.
"""

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from .dmd import CAUSAL_JUMP, HANKEL, load_model, save_model
from .data import MonodParams, load_plate_csv, simulate_plate, write_plate_csv
from .errors import (
    CJDMDError,
    ContractError,
    DataFormatError,
    InsufficientDataError,
    ModelFileError,
    NumericalError,
)
from .forecast import evaluate, normalized_mse, rollout, write_forecast_table
from .selection import fit_auto, split, sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4, 5

VARIANT_NAMES = {"hankel": HANKEL, "causal-jump": CAUSAL_JUMP}
VARIANT_NAMES_REV = {v: k for k, v in VARIANT_NAMES.items()}


class UsageError(CJDMDError):
    pass


@dataclass(frozen=True)
class Option:
    flag: str
    default: object
    parse: object
    help: str

    @property
    def key(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise ValueError("must be a positive integer")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise ValueError("must be a non-negative integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise ValueError("must be a positive number")
    return v


def _nonneg_float(text):
    v = float(text)
    if not (math.isfinite(v) and v >= 0):
        raise ValueError("must be a non-negative number")
    return v


def _rank(text):
    text = str(text).strip()
    return "auto" if text == "auto" else _positive_int(text)


def _variant(text):
    if text not in VARIANT_NAMES:
        raise ValueError(f"must be one of {', '.join(VARIANT_NAMES)}")
    return text


def _propagation(text):
    if text not in ("relift", "linear"):
        raise ValueError("must be 'relift' or 'linear'")
    return text


def _int_list(text):
    values = [_positive_int(t) for t in str(text).split(",") if t.strip()]
    if not values:
        raise ValueError("must be a comma-separated list of positive integers")
    return values


def _grid(text):
    r, sep, c = str(text).lower().partition("x")
    if not sep:
        raise ValueError("must look like ROWSxCOLS, e.g. 8x12")
    return _positive_int(r), _positive_int(c)


def _horizon(text):
    text = str(text).strip()
    return "auto" if text == "auto" else _positive_int(text)


def _text(text):
    return str(text)


_INPUT = Option("--input", None, _text, "plate CSV")
_OUTPUT = Option("--output", None, _text, "output file")
_SEED = Option("--seed", 0, _nonneg_int, "random seed (noise for simulate, split otherwise)")
_VARIANT = Option("--variant", "causal-jump", _variant, "hankel | causal-jump")
_PROP = Option("--propagation", "relift", _propagation, "relift | linear rollout")

COMMANDS = {
    "simulate": [
        _OUTPUT,
        Option("--grid", (8, 12), _grid, "plate layout ROWSxCOLS"),
        Option("--hours", 27.0, _positive_float, "duration in hours"),
        Option("--dt-min", 3.0, _positive_float, "sampling interval in minutes"),
        _SEED,
        Option("--noise", 0.0, _nonneg_float, "noise std as a fraction of the plate RMS OD"),
        Option("--r-max", MonodParams.r_max, _positive_float, "base max growth rate (1/h)"),
        Option("--k-s", MonodParams.K_s, _positive_float, "half-velocity constant (g/L)"),
        Option("--gamma", MonodParams.gamma, _positive_float, "yield coefficient"),
        Option("--n0", MonodParams.N0, _positive_float, "initial OD"),
    ],
    "fit": [
        _INPUT, _OUTPUT,
        Option("--tau", 9, _positive_int, "window length"),
        Option("--order", 3, _positive_int, "max monomial order"),
        Option("--rank", "auto", _rank, "truncation rank or 'auto'"),
        _VARIANT, _SEED, _PROP,
    ],
    "sweep": [
        _INPUT, _OUTPUT,
        Option("--model", None, _text, "where to save the best model"),
        Option("--tau", [3, 6, 9], _int_list, "comma-separated window lengths"),
        Option("--order", [1, 2, 3], _int_list, "comma-separated max orders"),
        _VARIANT, _SEED, _PROP,
        Option("--jobs", 1, _positive_int, "parallel grid workers"),
    ],
    "forecast": [
        _INPUT, _OUTPUT,
        Option("--model", None, _text, "model file"),
        Option("--well", None, _text, "well id"),
        Option("--horizon", "auto", _horizon, "steps to predict or 'auto' (rest of series)"),
        _PROP,
    ],
}

REQUIRED = {
    "simulate": ("output",),
    "fit": ("input", "output"),
    "sweep": ("input", "output"),
    "forecast": ("input", "model", "well", "output"),
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_config(command: str, flags: dict, file_values: dict) -> dict:
    """Merge defaults, config file and flags; raises :class:`UsageError` on bad keys or values."""
    options = {o.key: o for o in COMMANDS[command]}
    unknown = sorted(set(file_values) - set(options))
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    cfg = {}
    for key, opt in options.items():
        if flags.get(key) is not None:
            raw, source = flags[key], opt.flag
        elif key in file_values:
            raw, source = file_values[key], f"config key {key!r}"
        else:
            cfg[key] = opt.default
            continue
        try:
            cfg[key] = opt.parse(raw)
        except ValueError as exc:
            raise UsageError(f"invalid value {raw!r} for {source}: {exc}") from None
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        raise UsageError(f"{command} needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return cfg


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return "x".join(str(v) for v in value)
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


def config_lines(command: str, cfg: dict) -> list[str]:
    return [f"command = {command}"] + [f"{k} = {_fmt(v)}" for k, v in cfg.items()]


def _echo(lines, out=None):
    out = out or sys.stdout
    for line in lines:
        out.write(f"# {line}\n")


def _load_plate(path):
    try:
        return load_plate_csv(path)
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def _split_series(ds, seed):
    spec = split(ds.well_ids, seed)
    m = ds.as_mapping()
    return spec, [m[i] for i in spec.train_ids], [m[i] for i in spec.val_ids], m


def _check_length(ds, tau, variant):
    # the shortest series must hold one past and one future window
    need = tau + (tau if variant == CAUSAL_JUMP else 1)
    if ds.n_points < need:
        raise InsufficientDataError(
            f"series {ds.well_ids[0]!r} (shortest, {ds.n_points} points) is too short for "
            f"tau={tau}: {VARIANT_NAMES_REV[variant]} needs at least {need}")


def cmd_simulate(cfg, echo):
    rows, cols = cfg["grid"]
    base = MonodParams(r_max=cfg["r_max"], K_s=cfg["k_s"], gamma=cfg["gamma"], N0=cfg["n0"])
    ds = simulate_plate(rows, cols, cfg["hours"], cfg["dt_min"], base=base,
                        noise_frac=cfg["noise"], seed=cfg["seed"])
    write_plate_csv(ds, cfg["output"], header_lines=echo)
    print(f"wells = {len(ds.well_ids)}")
    print(f"points = {ds.n_points}")
    print(f"dt_min = {ds.timestep_min!r}")


def cmd_fit(cfg, echo):
    ds = _load_plate(cfg["input"])
    variant = VARIANT_NAMES[cfg["variant"]]
    _check_length(ds, cfg["tau"], variant)
    relift = cfg["propagation"] == "relift"
    spec, train, val, _ = _split_series(ds, cfg["seed"])
    model, _ = fit_auto(train, val, cfg["tau"], cfg["order"], variant, cfg["rank"], relift=relift)
    tr = evaluate(model, train, relift=relift).normalized_mse_percent
    va = evaluate(model, val, relift=relift).normalized_mse_percent
    save_model(model, cfg["output"])
    print(f"rank_used = {model.rank_used}")
    print(f"train_mse_percent = {tr!r}")
    print(f"val_mse_percent = {va!r}")
    return model, tr, va


def cmd_sweep(cfg, echo):
    ds = _load_plate(cfg["input"])
    variant = VARIANT_NAMES[cfg["variant"]]
    spec = split(ds.well_ids, cfg["seed"])
    result = sweep(ds.as_mapping(), spec, cfg["tau"], cfg["order"], variant,
                   n_jobs=cfg["jobs"], relift=cfg["propagation"] == "relift")
    b = result.best
    with open(cfg["output"], "w") as fh:
        _echo(echo, fh)
        fh.write("tau\torder\trank\ttrain_mse_percent\tval_mse_percent\tobjective\terror\n")
        for g in result.grid:
            rank = "" if g.rank is None else str(g.rank)
            fh.write(f"{g.tau}\t{g.order}\t{rank}\t{g.train_mse!r}\t{g.val_mse!r}\t"
                     f"{g.objective!r}\t{g.error or ''}\n")
        fh.write(f"# best = tau {b.tau}, order {b.order}, rank {b.rank}\n")
        fh.write(f"# test_mse_percent = {result.test_mse_percent!r}\n")
    if cfg["model"]:
        save_model(result.model, cfg["model"])
    print(f"best = tau {b.tau}, order {b.order}, rank {b.rank}")
    print(f"train_mse_percent = {b.train_mse!r}")
    print(f"val_mse_percent = {b.val_mse!r}")
    print(f"test_mse_percent = {result.test_mse_percent!r}")
    return result


def cmd_forecast(cfg, echo):
    model = load_model(cfg["model"])
    ds = _load_plate(cfg["input"])
    well = cfg["well"]
    if well not in ds.well_ids:
        raise UsageError(f"unknown well {well!r}; available: {', '.join(ds.well_ids)}")
    y = ds.series(well)
    tau = model.tau
    if y.shape[0] <= tau:
        raise InsufficientDataError(f"well {well!r} has {y.shape[0]} points, need more than tau={tau}")
    horizon = y.shape[0] - tau if cfg["horizon"] == "auto" else cfg["horizon"]
    f = rollout(model, y[:tau], horizon, relift=cfg["propagation"] == "relift")
    truth = y[tau:tau + horizon]
    n = truth.shape[0]
    mse = normalized_mse(f.predicted[:n], truth) if n else float("nan")
    full_truth = np.full(horizon, np.nan)
    full_truth[:n] = truth
    times = ds.start_min + ds.timestep_min * np.arange(tau, tau + horizon)
    header = echo + [f"compared_points = {n}", f"normalized_mse_percent = {mse!r}"]
    write_forecast_table(cfg["output"], f.predicted, full_truth if n else None,
                         start_index=tau, time_min=times, header_lines=header)
    print(f"well = {well}")
    print(f"normalized_mse_percent = {mse!r}")
    return mse


HANDLERS = {"simulate": cmd_simulate, "fit": cmd_fit, "sweep": cmd_sweep, "forecast": cmd_forecast}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cjdmd", description="Causal-jump Koopman/DMD growth-curve models.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value config file")
        for o in options:
            # defaults stay None so file values are only overridden by explicit flags
            p.add_argument(o.flag, dest=o.key, default=None, help=f"{o.help} (default: {_fmt(o.default)})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(command, flags, file_values)
        echo = config_lines(command, cfg)
        _echo(echo)
        HANDLERS[command](cfg, echo)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ModelFileError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
