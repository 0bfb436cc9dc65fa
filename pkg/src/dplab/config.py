"""
Run configuration.

A config file is TOML with the sections ``grid``, ``solver``, ``family`` and
``experiment`` (the latter with one sub-table per experiment). Every key is
optional; unknown keys are rejected with their dotted path.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import tomli

__all__ = [
    "ConfigError",
    "GridConfig",
    "SolverSettings",
    "FamilyConfig",
    "ExpansionConfig",
    "NonuniformConfig",
    "StabilityConfig",
    "MollifyConfig",
    "ValidationConfig",
    "LemmaConfig",
    "SimulateConfig",
    "ExperimentSettings",
    "Config",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "canonical_json",
    "config_digest",
]


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class GridConfig:
    L: float = 12 * math.pi
    N: int | None = None  # None selects the smallest adequate power of two
    nyquist_factor: float = 3.0

    def check(self, path):
        if not self.L > 0:
            raise ConfigError(f"{path}.L: must be positive")
        if self.N is not None and (not _pow2(self.N) or self.N < 16):
            raise ConfigError(f"{path}.N: N must be a power of two >= 16")
        if not self.nyquist_factor >= 2:
            raise ConfigError(f"{path}.nyquist_factor: must be >= 2")


@dataclass
class SolverSettings:
    dt: float | None = None  # None selects the default step
    guard_gradient_max: float = 1e3
    guard_tail_max: float = 1e-6

    def check(self, path):
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"{path}.dt: must be positive (or omitted)")
        if not (self.guard_gradient_max > 0 and self.guard_tail_max > 0):
            raise ConfigError(f"{path}: guard thresholds must be positive")


@dataclass
class FamilyConfig:
    n_min: int = 4
    n_max: int = 10
    sigma: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    slope_tol: float = 0.1
    linf_slope_tol: float = 0.05
    product_slope_tol: float = 0.1
    product_min_over_median: float = 0.5
    contrast_slope_max: float = -1.8

    def check(self, path):
        if self.n_min < 3 or self.n_max - self.n_min < 2:
            raise ConfigError(f"{path}: need n_min >= 3 and at least three packet indices")
        if not self.sigma:
            raise ConfigError(f"{path}.sigma: empty list")


@dataclass
class ExpansionConfig:
    t_min: float = 1e-3
    t_max: float = 1e-1
    t_points: int = 7
    u0: list = field(default_factory=lambda: ["cos:1", "cos:3", "packet:5"])
    slope_low: float = 1.8
    slope_high: float = 2.2

    def check(self, path):
        if not 0 < self.t_min < self.t_max:
            raise ConfigError(f"{path}: need 0 < t_min < t_max")
        if self.t_points < 3:
            raise ConfigError(f"{path}.t_points: need at least 3")


@dataclass
class NonuniformConfig:
    n_min: int = 4
    n_max: int = 8
    t_star: list = field(default_factory=lambda: [0.01, 0.05, 0.1])
    d0_slope_tol: float = 0.1
    kappa_variation_max: float = 2.0
    amplification_slope_min: float = 0.8

    def check(self, path):
        if self.n_max - self.n_min < 2 or self.n_min < 3:
            raise ConfigError(f"{path}: need n_min >= 3 and at least three packet indices")
        if not self.t_star or min(self.t_star) <= 0:
            raise ConfigError(f"{path}.t_star: must be positive times")


@dataclass
class StabilityConfig:
    trials: int = 20
    horizon: float = 0.5
    deltas: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    L: float = math.pi
    N: int = 256
    band: float = 8.0
    dt: float = 1e-3
    ratio_max: float = 10.0
    delta_variation_max: float = 2.0

    def check(self, path):
        if self.trials < 1:
            raise ConfigError(f"{path}.trials: must be >= 1")
        if not _pow2(self.N) or self.N < 16:
            raise ConfigError(f"{path}.N: N must be a power of two >= 16")
        if not (self.horizon > 0 and self.dt > 0):
            raise ConfigError(f"{path}: horizon and dt must be positive")


@dataclass
class MollifyConfig:
    packet_n: int = 6
    background: str = "cos:3"
    cutoffs: list = field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    horizon: float = 0.2
    ratio_variation_max: float = 2.0
    ripple: float = 0.1
    zero_tol: float = 1e-9
    interp_slack: float = 1.1

    def check(self, path):
        if len(self.cutoffs) < 2 or min(self.cutoffs) < 0:
            raise ConfigError(f"{path}.cutoffs: need at least two nonnegative indices")
        if not self.horizon > 0:
            raise ConfigError(f"{path}.horizon: must be positive")


@dataclass
class ValidationConfig:
    L: float = math.pi
    N: int = 256
    amplitude: float = 0.25
    dt: float = 1e-3
    t_end: float = 1.0
    order_dts: list = field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005, 0.0025])
    refine_N: list = field(default_factory=lambda: [32, 64, 128])
    order_target: float = 4.0
    order_tol: float = 0.2
    m1_abs_max: float = 1e-10
    m3_rel_max: float = 1e-8
    steady_max: float = 1e-13
    refine_factor_min: float = 10.0
    refine_floor: float = 1e-12
    apriori_max: float = 1.5

    def check(self, path):
        if not _pow2(self.N) or self.N < 16:
            raise ConfigError(f"{path}.N: N must be a power of two >= 16")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigError(f"{path}: dt and t_end must be positive")
        if len(self.order_dts) < 4:
            raise ConfigError(f"{path}.order_dts: need at least four step sizes (the finest is the reference)")


@dataclass
class LemmaConfig:
    samples: int = 100
    L: float = math.pi
    N_list: list = field(default_factory=lambda: [64, 128])
    band: float = 8.0
    s: float = 1.0
    variation_max: float = 2.0

    def check(self, path):
        if self.samples < 1:
            raise ConfigError(f"{path}.samples: must be >= 1")


@dataclass
class SimulateConfig:
    u0: str = "packet:5"
    t_end: float = 0.1
    snapshots: list = field(default_factory=lambda: [0.05, 0.1])

    def check(self, path):
        if not self.t_end > 0:
            raise ConfigError(f"{path}.t_end: must be positive")


@dataclass
class ExperimentSettings:
    seed: int = 0
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    nonuniform: NonuniformConfig = field(default_factory=NonuniformConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    mollify: MollifyConfig = field(default_factory=MollifyConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    lemma: LemmaConfig = field(default_factory=LemmaConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)

    def check(self, path):
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"{path}.seed: must be an unsigned 64-bit integer")


@dataclass
class Config:
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverSettings = field(default_factory=SolverSettings)
    family: FamilyConfig = field(default_factory=FamilyConfig)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)


def _coerce(value, default, path):
    if default is None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        if default:
            return [_coerce(v, default[0], f"{path}[{i}]") for i, v in enumerate(value)]
        return list(value)
    raise ConfigError(f"{path}: unsupported value")


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a table")
    obj = cls()
    known = {f.name: f for f in fields(cls)}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"{sub}: unknown key")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            setattr(obj, key, _build(type(current), value, sub))
        else:
            setattr(obj, key, _coerce(value, current, sub))
    if hasattr(obj, "check"):
        obj.check(path or "config")
    return obj


def config_from_dict(data: dict) -> Config:
    return _build(Config, data, "")


def config_to_dict(cfg: Config) -> dict:
    return dataclasses.asdict(cfg)


def load_config(path: str | Path | None) -> Config:
    """Parse and validate a TOML config; ``None`` or an empty file gives all defaults."""
    if path is None:
        return Config()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        # tomli reports "(at line L, column C)"
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return config_from_dict(data)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(cfg: Config) -> str:
    return hashlib.sha256(canonical_json(config_to_dict(cfg)).encode()).hexdigest()
