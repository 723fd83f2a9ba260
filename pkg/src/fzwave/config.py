"""Run configuration: a TOML tree with strict key checking.

Units are nondimensional throughout: lengths in units of ``L``'s scale,
times in units of the retardation time (fixed to 1), coefficients as given.

Example
-------
::

    [model]
    length = 1.0
    n_elements = 256
    alpha = 0.5
    tau = 0.5
    rho = { preset = "constant", value = 1.0 }
    mu = { preset = "two-layer", left = 1.0, right = 0.5, interface = 0.5 }
    lambda = { preset = "constant", value = 0.5 }

    [data]
    hookean_stress = false
    g = { preset = "sine", k = 1, amplitude = 0.1 }
    h = { preset = "zero" }
    s = { preset = "constant", value = 0.05 }

    [load]
    preset = "gaussian-pulse"
    t0 = 0.5
    sigma = 0.1

    [scheme]
    dt = 1e-3
    t_final = 2.0
    n_modes = 32

    [output]
    directory = "out"
    snapshot_times = [0.0, 1.0, 2.0]
    seed = 0
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evolution import SCHEMES
from .presets import ELEMENT_PRESETS, LOAD_PARAMS, NODAL_PRESETS, PresetError, check_preset

CHECKS = ("energy_inequality", "dissipation_sign", "stress_initial", "conservation")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _keys(block: Mapping[str, Any], allowed, where: str) -> None:
    if not isinstance(block, Mapping):
        raise ConfigError(f"{where}: expected a table")
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key (allowed: {', '.join(allowed)})")


def _num(block: Mapping[str, Any], key: str, where: str, default=None, integer: bool = False):
    if key not in block:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"{where}.{key}: must be finite")
    return float(val)


def _preset(block: Mapping[str, Any], key: str, table, where: str, default: Mapping) -> Dict[str, Any]:
    spec = block.get(key, default)
    if not isinstance(spec, Mapping):
        raise ConfigError(f"{where}.{key}: expected a preset table")
    try:
        check_preset(spec, table, f"{where}.{key}")
    except PresetError as exc:
        raise ConfigError(str(exc)) from None
    return dict(spec)


@dataclass
class ModelConfig:
    length: float
    n_elements: int
    alpha: float
    tau: float
    rho: Dict[str, Any]
    mu: Dict[str, Any]
    lam: Dict[str, Any]

    KEYS = ("length", "n_elements", "alpha", "tau", "rho", "mu", "lambda")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModelConfig":
        w = "model"
        _keys(d, cls.KEYS, w)
        length = _num(d, "length", w, 1.0)
        n = _num(d, "n_elements", w, integer=True)
        alpha = _num(d, "alpha", w)
        tau = _num(d, "tau", w)
        if not length > 0.0:
            raise ConfigError("model.length: must be positive")
        if not 2 <= n <= 4096:
            raise ConfigError("model.n_elements: must lie in [2, 4096]")
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"model.alpha: must lie in (0, 1], got {alpha}")
        if not 0.0 < tau <= 1.0:
            raise ConfigError(f"model.tau: must lie in (0, 1], got {tau}")
        const = {"preset": "constant", "value": 1.0}
        return cls(
            length, n, alpha, tau,
            _preset(d, "rho", ELEMENT_PRESETS, w, const),
            _preset(d, "mu", ELEMENT_PRESETS, w, const),
            _preset(d, "lambda", ELEMENT_PRESETS, w, {"preset": "zero"}),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length": self.length, "n_elements": self.n_elements, "alpha": self.alpha,
            "tau": self.tau, "rho": self.rho, "mu": self.mu, "lambda": self.lam,
        }


@dataclass
class DataConfig:
    g: Dict[str, Any]
    h: Dict[str, Any]
    s: Dict[str, Any]
    hookean_stress: bool = False

    KEYS = ("g", "h", "s", "hookean_stress")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DataConfig":
        w = "data"
        _keys(d, cls.KEYS, w)
        flag = d.get("hookean_stress", False)
        if not isinstance(flag, bool):
            raise ConfigError("data.hookean_stress: expected true or false")
        zero = {"preset": "zero"}
        return cls(
            _preset(d, "g", NODAL_PRESETS, w, zero),
            _preset(d, "h", NODAL_PRESETS, w, zero),
            _preset(d, "s", ELEMENT_PRESETS, w, zero),
            flag,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"g": self.g, "h": self.h, "s": self.s, "hookean_stress": self.hookean_stress}


@dataclass
class SchemeBlock:
    dt: float
    t_final: float
    scheme: str = "trapezoid"
    n_modes: int = 16

    KEYS = ("dt", "t_final", "scheme", "n_modes")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SchemeBlock":
        w = "scheme"
        _keys(d, cls.KEYS, w)
        dt = _num(d, "dt", w)
        t_final = _num(d, "t_final", w)
        scheme = d.get("scheme", "trapezoid")
        n_modes = _num(d, "n_modes", w, 16, integer=True)
        if not dt > 0.0:
            raise ConfigError("scheme.dt: must be positive")
        if not t_final > 0.0:
            raise ConfigError("scheme.t_final: must be positive")
        if abs(dt * round(t_final / dt) - t_final) > 1e-12:
            raise ConfigError("scheme.t_final: must be an integer multiple of scheme.dt")
        if scheme not in SCHEMES:
            raise ConfigError(f"scheme.scheme: unknown scheme '{scheme}', expected one of {SCHEMES}")
        if n_modes < 1:
            raise ConfigError("scheme.n_modes: must be positive")
        return cls(dt, t_final, scheme, n_modes)

    def to_dict(self) -> Dict[str, Any]:
        return {"dt": self.dt, "t_final": self.t_final, "scheme": self.scheme, "n_modes": self.n_modes}


@dataclass
class OutputConfig:
    directory: str = "out"
    snapshot_times: List[float] = field(default_factory=lambda: [0.0])
    seed: int = 0
    checks: List[str] = field(default_factory=lambda: list(CHECKS))
    slack: float = 1.01
    conservation_tol: float = 1e-3

    KEYS = ("directory", "snapshot_times", "seed", "checks", "slack", "conservation_tol")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "OutputConfig":
        w = "output"
        _keys(d, cls.KEYS, w)
        directory = d.get("directory", "out")
        if not isinstance(directory, str):
            raise ConfigError("output.directory: expected a string")
        times = d.get("snapshot_times", [0.0])
        if not isinstance(times, list) or not all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in times
        ):
            raise ConfigError("output.snapshot_times: expected a list of numbers")
        checks = d.get("checks", list(CHECKS))
        if not isinstance(checks, list):
            raise ConfigError("output.checks: expected a list")
        for c in checks:
            if c not in CHECKS:
                raise ConfigError(f"output.checks: unknown check '{c}', expected one of {CHECKS}")
        slack = _num(d, "slack", w, 1.01)
        if slack < 1.0:
            raise ConfigError("output.slack: must be >= 1")
        tol = _num(d, "conservation_tol", w, 1e-3)
        return cls(directory, [float(t) for t in times], _num(d, "seed", w, 0, integer=True),
                   list(checks), slack, tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "directory": self.directory, "snapshot_times": list(self.snapshot_times),
            "seed": self.seed, "checks": list(self.checks), "slack": self.slack,
            "conservation_tol": self.conservation_tol,
        }


@dataclass
class RunConfig:
    model: ModelConfig
    data: DataConfig
    load: Dict[str, Any]
    scheme: SchemeBlock
    output: OutputConfig
    source: Optional[str] = None

    KEYS = ("model", "data", "load", "scheme", "output")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], source: Optional[str] = None) -> "RunConfig":
        _keys(d, cls.KEYS, "config")
        for block in ("model", "scheme"):
            if block not in d:
                raise ConfigError(f"{block}: required table missing")
        load = d.get("load", {"preset": "zero"})
        if not isinstance(load, Mapping):
            raise ConfigError("load: expected a table")
        try:
            check_preset(load, LOAD_PARAMS, "load")
        except PresetError as exc:
            raise ConfigError(str(exc)) from None
        cfg = cls(
            ModelConfig.from_dict(d["model"]),
            DataConfig.from_dict(d.get("data", {})),
            dict(load),
            SchemeBlock.from_dict(d["scheme"]),
            OutputConfig.from_dict(d.get("output", {})),
            source,
        )
        n_int = cfg.model.n_elements - 1
        if cfg.scheme.n_modes > n_int:
            raise ConfigError(f"scheme.n_modes: {cfg.scheme.n_modes} exceeds the {n_int} interior nodes")
        for t in cfg.output.snapshot_times:
            k = round(t / cfg.scheme.dt)
            if t < 0.0 or t > cfg.scheme.t_final + 1e-12 or abs(k * cfg.scheme.dt - t) > 1e-9 * cfg.scheme.dt + 1e-12:
                raise ConfigError(f"output.snapshot_times: {t} is not a grid time in [0, t_final]")
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy({
            "model": self.model.to_dict(),
            "data": self.data.to_dict(),
            "load": self.load,
            "scheme": self.scheme.to_dict(),
            "output": self.output.to_dict(),
        })


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    try:
        tree = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source or '<config>'}: {exc}") from None
    return RunConfig.from_dict(tree, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_config(text, str(path))


__all__ = ["CHECKS", "ConfigError", "RunConfig", "load_config", "parse_config"]
