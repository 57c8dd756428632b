#!/usr/bin/env python3
"""
Experiment configuration

An experiment is read from a TOML file or built from a per-system preset, then
adjusted by command-line overrides. Schema:

    seed = 7                            # mandatory

    [system]
    builtin = "sys1"                    # or name/dim/poly/rational, see dynamics
    params = { a = 0.1 }                # builtin parameters, optional
    file = "my_system.toml"             # alternative: external definition

    [sampling]
    n_traj = 1000
    n_snap = 30
    init_box = [[-1.0, 1.0], [-1.0, 1.0]]

    [[dictionary]]
    m = 1                               # total degree
    P = 2                               # rational power cap, optional
    include_constant = false
    # basis = ["x1", "x2", "x1^2"]      # custom order instead of m/P

    [grid]
    start = 0.05
    stop = 2.8
    step = 0.05
    # values = [0.5, 1.1, 2.8]

    [prediction]
    periods = [0.5, 1.1, 2.8]
    x0 = [0.5, 0.5]
    horizon = 5.0
    rate_hz = 100.0

    [spectral]
    rate_hz = 100.0
    n_samples = 500

    [identification]
    pinv_rtol = 1e-8                    # optional, default 1e-10 * max(K, N)
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.loader import fail, key_line, load_toml
from config.settings import Config
from koopman.dynamics import DynamicalSystem, builtin_system, canonical_name, load_system, system_from_mapping
from koopman.errors import ConfigError
from koopman.metrics import DEFAULT_RATE_HZ, DEFAULT_SAMPLES, DEFAULT_X0
from koopman.observables import Dictionary, build_dictionary, custom_dictionary

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.05
DEFAULT_HORIZON = 5.0
_GRID_DECIMALS = 12


@dataclass(frozen=True)
class DictionarySpec:
    m: Optional[int] = None
    P: Optional[int] = None
    include_constant: bool = False
    basis: Optional[Tuple[str, ...]] = None

    def build(self, n: int) -> Dictionary:
        if self.basis is not None:
            return custom_dictionary(self.basis, n)
        return build_dictionary(n, self.m, self.include_constant, self.P)

    def to_dict(self) -> Dict[str, Any]:
        if self.basis is not None:
            return {"basis": list(self.basis)}
        data: Dict[str, Any] = {"m": self.m, "include_constant": self.include_constant}
        if self.P is not None:
            data["P"] = self.P
        return data


@dataclass(frozen=True)
class ExperimentConfig:
    system: DynamicalSystem
    dictionaries: Tuple[DictionarySpec, ...]
    n_traj: int
    n_snap: int
    init_box: Tuple[Tuple[float, float], ...]
    seed: int
    grid: Tuple[float, ...]
    prediction_periods: Tuple[float, ...] = ()
    x0: Tuple[float, ...] = DEFAULT_X0
    horizon: float = DEFAULT_HORIZON
    rate_hz: float = DEFAULT_RATE_HZ
    spectral_rate_hz: float = DEFAULT_RATE_HZ
    spectral_samples: int = DEFAULT_SAMPLES
    pinv_rtol: Optional[float] = None
    out_dir: Path = field(default_factory=lambda: Config.DEFAULT_OUT_DIR)

    def __post_init__(self):
        validate_grid(self.grid)
        if self.n_traj < 1 or self.n_snap < 1:
            raise ConfigError(f"n_traj and n_snap must be positive, got {self.n_traj} x {self.n_snap}")
        if len(self.init_box) != self.system.dim:
            raise ConfigError(f"init_box has {len(self.init_box)} intervals, system has dimension {self.system.dim}")
        if len(self.x0) != self.system.dim:
            raise ConfigError(f"x0 has {len(self.x0)} entries, system has dimension {self.system.dim}")
        if not self.dictionaries:
            raise ConfigError("at least one dictionary is required")

    def built_dictionaries(self) -> List[Dictionary]:
        return [spec.build(self.system.dim) for spec in self.dictionaries]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system.name,
            "params": dict(self.system.params),
            "dictionaries": [d.to_dict() for d in self.dictionaries],
            "n_traj": self.n_traj,
            "n_snap": self.n_snap,
            "init_box": [list(b) for b in self.init_box],
            "seed": self.seed,
            "grid": list(self.grid),
            "prediction_periods": list(self.prediction_periods),
            "x0": list(self.x0),
            "horizon": self.horizon,
            "rate_hz": self.rate_hz,
            "spectral_rate_hz": self.spectral_rate_hz,
            "spectral_samples": self.spectral_samples,
            "pinv_rtol": self.pinv_rtol,
        }


def make_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive grid start, start + step, ... <= stop, rounded to suppress drift"""
    if step <= 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigError(f"empty grid: start {start} > stop {stop}")
    return tuple(round(start + i * step, _GRID_DECIMALS) for i in range(count))


def validate_grid(grid: Sequence[float]) -> None:
    values = np.asarray(grid, dtype=float)
    if values.size == 0:
        raise ConfigError("sampling-period grid is empty")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ConfigError(f"sampling periods must be positive and finite: {list(grid)}")
    if np.any(np.diff(values) <= 0):
        raise ConfigError(f"sampling-period grid must be strictly increasing: {list(grid)}")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_UNIT_BOX = ((-1.0, 1.0), (-1.0, 1.0))

_PRESETS: Dict[str, Dict[str, Any]] = {
    "linear-spiral": {"dictionaries": (DictionarySpec(m=1),), "stop": 2.8, "periods": (0.5, 1.1, 2.8)},
    "rod": {"dictionaries": (DictionarySpec(m=1),), "stop": 2.8, "periods": (0.5, 1.1, 2.8)},
    "fixed-point-cubic": {
        "dictionaries": (DictionarySpec(m=7), DictionarySpec(m=10), DictionarySpec(m=13)),
        "stop": 2.8, "periods": (0.5, 1.1, 2.8),
    },
    "limit-cycle": {
        "dictionaries": (DictionarySpec(m=7), DictionarySpec(m=10), DictionarySpec(m=13)),
        "stop": 2.8, "periods": (0.5, 1.1, 2.8), "init_box": ((-1.5, 1.5), (-1.5, 1.5)),
    },
    "real-eig-triangular": {
        "dictionaries": (DictionarySpec(basis=("x1", "x2", "x1^2")),),
        "stop": 2.8, "periods": (0.5, 1.1, 2.8),
    },
    "nonpoly-rational": {
        "dictionaries": (DictionarySpec(m=1, P=2), DictionarySpec(m=1, P=3),
                         DictionarySpec(m=2, P=2), DictionarySpec(m=2, P=3)),
        "stop": 2.1, "periods": (0.3, 0.9, 2.1),
    },
}


def preset_config(system: str, seed: Optional[int], params: Optional[Mapping[str, float]] = None) -> ExperimentConfig:
    """Experimental protocol for a builtin system: 1000 trajectories x 30 snapshots"""
    if seed is None:
        raise ConfigError("a seed is required (--seed)")
    key = canonical_name(system)
    preset = _PRESETS[key]
    sys = builtin_system(key, params)
    return ExperimentConfig(
        system=sys,
        dictionaries=preset["dictionaries"],
        n_traj=1000,
        n_snap=30,
        init_box=preset.get("init_box", _UNIT_BOX),
        seed=int(seed),
        grid=make_grid(DEFAULT_GRID_STEP, preset["stop"], DEFAULT_GRID_STEP),
        prediction_periods=preset["periods"],
    )


# ---------------------------------------------------------------------------
# TOML
# ---------------------------------------------------------------------------

def load_experiment(path, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    mapping, text = load_toml(path)
    return experiment_from_mapping(mapping, text, overrides, base_dir=Path(path).parent)


def experiment_from_mapping(mapping: Mapping[str, Any], text: Optional[str] = None,
                            overrides: Optional[Mapping[str, Any]] = None,
                            base_dir: Optional[Path] = None) -> ExperimentConfig:
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    seed = overrides.get("seed", mapping.get("seed"))
    if seed is None:
        raise ConfigError("a seed is required (top-level `seed = ...` or --seed)")
    if not isinstance(seed, int) or seed < 0:
        raise fail(f"seed must be a nonnegative integer, got {seed!r}", text, "seed")

    sys = _system(mapping, text, base_dir)

    sampling = mapping.get("sampling", {})
    box = sampling.get("init_box", [list(b) for b in _UNIT_BOX[:1]] * sys.dim)
    try:
        init_box = tuple((float(lo), float(hi)) for lo, hi in box)
    except (TypeError, ValueError):
        raise fail(f"init_box must be a list of [lo, hi] pairs, got {box!r}", text, "init_box")
    if any(not hi > lo for lo, hi in init_box):
        raise fail(f"init_box intervals must satisfy lo < hi: {box!r}", text, "init_box")

    dictionaries = tuple(_dictionary_spec(entry, text) for entry in mapping.get("dictionary", []))
    if not dictionaries:
        raise ConfigError("at least one [[dictionary]] table is required")

    grid = overrides.get("grid") or _grid(mapping.get("grid", {}), text)
    try:
        validate_grid(grid)
    except ConfigError as e:
        raise fail(str(e), text, "values" if "values" in mapping.get("grid", {}) else "start")

    prediction = mapping.get("prediction", {})
    spectral = mapping.get("spectral", {})
    identification = mapping.get("identification", {})

    config = ExperimentConfig(
        system=sys,
        dictionaries=dictionaries,
        n_traj=int(overrides.get("n_traj", sampling.get("n_traj", 1000))),
        n_snap=int(overrides.get("n_snap", sampling.get("n_snap", 30))),
        init_box=init_box,
        seed=seed,
        grid=tuple(float(v) for v in grid),
        prediction_periods=tuple(float(v) for v in overrides.get("periods", prediction.get("periods", ()))),
        x0=tuple(float(v) for v in overrides.get("x0", prediction.get("x0", DEFAULT_X0))),
        horizon=float(overrides.get("horizon", prediction.get("horizon", DEFAULT_HORIZON))),
        rate_hz=float(overrides.get("rate_hz", prediction.get("rate_hz", DEFAULT_RATE_HZ))),
        spectral_rate_hz=float(spectral.get("rate_hz", DEFAULT_RATE_HZ)),
        spectral_samples=int(spectral.get("n_samples", DEFAULT_SAMPLES)),
        pinv_rtol=identification.get("pinv_rtol"),
        out_dir=Path(overrides.get("out_dir", Config.DEFAULT_OUT_DIR)),
    )
    logger.debug(f"Loaded experiment for {sys.name}: {len(config.grid)} periods, {len(dictionaries)} dictionaries")
    return config


def apply_overrides(config: ExperimentConfig, overrides: Mapping[str, Any]) -> ExperimentConfig:
    """Command-line flags on top of a preset or loaded config"""
    changes: Dict[str, Any] = {}
    for key in ("seed", "n_traj", "n_snap", "horizon", "rate_hz"):
        if overrides.get(key) is not None:
            changes[key] = overrides[key]
    if overrides.get("grid"):
        changes["grid"] = tuple(float(v) for v in overrides["grid"])
    if overrides.get("periods"):
        changes["prediction_periods"] = tuple(float(v) for v in overrides["periods"])
    if overrides.get("x0"):
        changes["x0"] = tuple(float(v) for v in overrides["x0"])
    if overrides.get("out_dir") is not None:
        changes["out_dir"] = Path(overrides["out_dir"])
    return dataclasses.replace(config, **changes) if changes else config


def _system(mapping: Mapping[str, Any], text: Optional[str], base_dir: Optional[Path]) -> DynamicalSystem:
    section = mapping.get("system")
    if not isinstance(section, Mapping):
        raise ConfigError("missing [system] table")
    if "file" in section:
        path = Path(section["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_system(path)
    try:
        return system_from_mapping(mapping, text)
    except ConfigError as e:
        if e.line is None and "builtin" in section:
            raise type(e)(str(e), line=key_line(text, "builtin"))
        raise


def _dictionary_spec(entry: Mapping[str, Any], text: Optional[str]) -> DictionarySpec:
    if "basis" in entry:
        basis = entry["basis"]
        if not isinstance(basis, list) or not all(isinstance(b, str) for b in basis):
            raise fail(f"basis must be a list of labels, got {basis!r}", text, "basis")
        return DictionarySpec(basis=tuple(basis))
    m = entry.get("m")
    if not isinstance(m, int) or m < 1:
        raise fail(f"dictionary degree m must be a positive integer, got {m!r}", text, "m")
    P = entry.get("P")
    if P is not None and (not isinstance(P, int) or P < 1):
        raise fail(f"rational power cap P must be a positive integer, got {P!r}", text, "P")
    return DictionarySpec(m=m, P=P, include_constant=bool(entry.get("include_constant", False)))


def _grid(section: Mapping[str, Any], text: Optional[str]) -> Tuple[float, ...]:
    if "values" in section:
        try:
            return tuple(float(v) for v in section["values"])
        except (TypeError, ValueError):
            raise fail(f"grid values must be numbers, got {section['values']!r}", text, "values")
    try:
        start = float(section.get("start", DEFAULT_GRID_STEP))
        stop = float(section.get("stop", 2.8))
        step = float(section.get("step", DEFAULT_GRID_STEP))
    except (TypeError, ValueError) as e:
        raise fail(f"grid start/stop/step must be numbers: {e}", text, "start")
    try:
        return make_grid(start, stop, step)
    except ConfigError as e:
        raise fail(str(e), text, "step")
