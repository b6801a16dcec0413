"""Run configuration: an INI file with one section per module, plus
``section.key=value`` overrides that win over the file."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import ConfigError
from .forest import ForestConfig
from .mb import Thresholds
from .model import CircuitParams, FaultSpec, NoiseSpec, SwitchSchedule
from .simulator import SimConfig

DEFAULT_SEED = 42

# section -> key -> parser
SCHEMA = {
    "run": {"seed": int},
    "circuit": {"r0": float, "r1": float, "elastance": float, "source_amplitude": float},
    "schedule": {"period": float, "duty": float, "start_state": int},
    "fault": {"r0_factor": float, "c_factor": float, "onset": float},
    "noise": {"sigma": float, "seed": int},
    "sim": {"duration": float, "sample_rate": float, "method": str, "rk_step": float},
    "thresholds": {"thr1": float, "thr2": float, "debounce": int, "k": float,
                   "calibration_runs": int},
    "forest": {"n_trees": int, "max_depth": int, "min_leaf": int, "feature_subsample": int,
               "bootstrap": bool, "seed": int, "n_repeats": int},
    "dataset": {"train_per_class": int, "validation_per_class": int},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse(kind, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind is bool:
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind.__name__}") from None


@dataclass(frozen=True)
class RunConfig:
    seed: int
    params: CircuitParams
    schedule: SwitchSchedule
    fault: FaultSpec | None
    noise: NoiseSpec | None
    sim: SimConfig
    thresholds: Thresholds | None
    calibration_k: float
    calibration_runs: int
    debounce: int
    forest: ForestConfig
    n_repeats: int
    train_per_class: int
    validation_per_class: int

    @property
    def sigma(self) -> float:
        return 0.0 if self.noise is None else self.noise.sigma_volts


def _collect(path: str | Path | None, overrides: Sequence[str]) -> dict[str, dict[str, object]]:
    values: dict[str, dict[str, object]] = {s: {} for s in SCHEMA}
    if path is not None:
        cp = configparser.ConfigParser(interpolation=None)
        text = Path(path).read_text()
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in cp.sections():
            if section not in SCHEMA:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in cp.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"{path}: unknown key {section}.{key}")
                values[section][key] = _parse(SCHEMA[section][key], raw, f"{section}.{key}")
    for item in overrides:
        dotted, sep, raw = item.partition("=")
        section, dot, key = dotted.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not section.key=value")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        values[section][key] = _parse(SCHEMA[section][key], raw, dotted)
    return values


def load_config(path: str | Path | None = None, overrides: Sequence[str] = (),
                seed: int | None = None) -> RunConfig:
    """Build and validate a :class:`RunConfig`.

    Seed precedence: ``seed`` argument, then the file's ``[run] seed``, then
    the ``FDI_SEED`` environment variable, then 42.  A flag seed also replaces
    the per-module noise and forest seeds.
    """
    v = _collect(path, overrides)
    if seed is None:
        seed = v["run"].get("seed")
        if seed is None:
            env = os.environ.get("FDI_SEED")
            seed = _parse(int, env, "FDI_SEED") if env else DEFAULT_SEED
        noise_seed = v["noise"].get("seed", seed)
        forest_seed = v["forest"].get("seed", seed)
    else:
        noise_seed = forest_seed = seed

    try:
        nominal = CircuitParams.nominal()
        params = CircuitParams(**{**nominal.__dict__, **v["circuit"]})
        schedule = SwitchSchedule(**v["schedule"])
        f = v["fault"]
        r0f, cf = f.get("r0_factor", 1.0), f.get("c_factor", 1.0)
        if r0f != 1.0 and cf != 1.0:
            raise ConfigError("only one of fault.r0_factor and fault.c_factor may differ from 1")
        onset = f.get("onset", 0.0)
        if r0f != 1.0:
            fault = FaultSpec.r0_down(r0f, onset)
        elif cf != 1.0:
            fault = FaultSpec.cap_up(cf, onset)
        else:
            fault = None
        sigma = v["noise"].get("sigma", 0.02)
        noise = NoiseSpec(sigma, noise_seed) if sigma > 0 else None
        sim = SimConfig(**v["sim"])
        t = v["thresholds"]
        debounce = t.get("debounce", 3)
        thresholds = None
        if "thr1" in t or "thr2" in t:
            if not ("thr1" in t and "thr2" in t):
                raise ConfigError("set both thresholds.thr1 and thresholds.thr2, or neither")
            thresholds = Thresholds(t["thr1"], t["thr2"], debounce)
        k = t.get("k", 5.0)
        runs = t.get("calibration_runs", 5)
        if not k > 0 or runs < 1:
            raise ConfigError("thresholds.k must be positive and calibration_runs >= 1")
        fo = dict(v["forest"])
        n_repeats = fo.pop("n_repeats", 10)
        fo["seed"] = forest_seed
        forest = ForestConfig(**fo).checked(5)
        d = v["dataset"]
        train_n, val_n = d.get("train_per_class", 3), d.get("validation_per_class", 2)
        if train_n < 1 or val_n < 1 or n_repeats < 1:
            raise ConfigError("dataset sizes and forest.n_repeats must be >= 1")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(seed, params, schedule, fault, noise, sim, thresholds, k, runs, debounce,
                     forest, n_repeats, train_n, val_n)
