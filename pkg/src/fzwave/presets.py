"""Named presets for coefficient fields, initial data and loads.

Each preset is a mapping with a ``preset`` key plus parameters.  Lengths
(``interface``, ``center``, ``width``, table abscissae) are absolute
coordinates in ``(0, L)``.
"""

from __future__ import annotations

import math
from typing import Any, Dict, Mapping, Optional

import numpy as np

from .forcing import LoadSpec
from .spatial import ModalBasis

# preset -> allowed parameters
ELEMENT_PRESETS: Dict[str, tuple] = {
    "zero": (),
    "constant": ("value",),
    "two-layer": ("left", "right", "interface"),
    "ramp": ("start", "end"),
    "table": ("breakpoints",),
    "random": ("amplitude", "offset"),
}
NODAL_PRESETS: Dict[str, tuple] = {
    "zero": (),
    "sine": ("k", "amplitude"),
    "mode": ("k", "amplitude"),
    "bump": ("center", "width", "amplitude"),
    "table": ("points",),
    "random": ("amplitude", "n_terms"),
}
LOAD_PARAMS: Dict[str, tuple] = {
    "zero": (),
    "constant": ("value",),
    "gaussian-pulse": ("amplitude", "t0", "sigma", "profile", "k", "center", "width"),
    "mode": ("k", "amplitude", "omega"),
}

# random substreams, one per field
STREAM_IDS = {"rho": 11, "mu": 12, "lambda": 13, "g": 21, "h": 22, "s": 23}


class PresetError(ValueError):
    pass


def check_preset(spec: Mapping[str, Any], table: Dict[str, tuple], where: str) -> str:
    if "preset" not in spec:
        raise PresetError(f"{where}: missing 'preset' (one of {sorted(table)})")
    name = spec["preset"]
    if name not in table:
        raise PresetError(f"{where}.preset: unknown preset '{name}', expected one of {sorted(table)}")
    for key in spec:
        if key != "preset" and key not in table[name]:
            raise PresetError(f"{where}.{key}: unknown key for preset '{name}' (allowed: {list(table[name])})")
    return name


def _rng(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), STREAM_IDS[stream]])


def element_field(
    spec: Mapping[str, Any], length: float, n_elements: int, seed: int = 0, stream: str = "s"
) -> np.ndarray:
    """Per-element values evaluated at element midpoints."""
    name = check_preset(spec, ELEMENT_PRESETS, stream)
    xm = (np.arange(n_elements) + 0.5) * (length / n_elements)
    if name == "zero":
        return np.zeros(n_elements)
    if name == "constant":
        return np.full(n_elements, float(spec.get("value", 1.0)))
    if name == "two-layer":
        interface = float(spec.get("interface", 0.5 * length))
        return np.where(xm < interface, float(spec["left"]), float(spec["right"]))
    if name == "ramp":
        a, b = float(spec["start"]), float(spec["end"])
        return a + (b - a) * xm / length
    if name == "table":
        pts = np.asarray(spec["breakpoints"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or np.any(np.diff(pts[:, 0]) <= 0.0):
            raise PresetError(f"{stream}.breakpoints: need increasing [[x, value], ...] pairs")
        idx = np.searchsorted(pts[:, 0], xm, side="right") - 1
        return pts[np.clip(idx, 0, None), 1]
    rng = _rng(seed, stream)
    return float(spec.get("offset", 0.0)) + float(spec.get("amplitude", 1.0)) * rng.uniform(-1.0, 1.0, n_elements)


def nodal_field(
    spec: Mapping[str, Any],
    basis: ModalBasis,
    seed: int = 0,
    stream: str = "g",
) -> np.ndarray:
    """Values at interior nodes."""
    name = check_preset(spec, NODAL_PRESETS, stream)
    model = basis.model
    x = model.interior_nodes()
    length = model.domain_length
    amp = float(spec.get("amplitude", 1.0))
    if name == "zero":
        return np.zeros(model.n_interior)
    if name == "sine":
        return amp * np.sin(int(spec.get("k", 1)) * math.pi * x / length)
    if name == "mode":
        k = int(spec.get("k", 1))
        if not 1 <= k <= basis.n_modes:
            raise PresetError(f"{stream}.k: mode index {k} outside [1, {basis.n_modes}]")
        return amp * basis.vectors[:, k - 1]
    if name == "bump":
        center = float(spec.get("center", 0.5 * length))
        width = float(spec.get("width", 0.1 * length))
        return amp * np.exp(-0.5 * ((x - center) / width) ** 2)
    if name == "table":
        pts = np.asarray(spec["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or np.any(np.diff(pts[:, 0]) <= 0.0):
            raise PresetError(f"{stream}.points: need increasing [[x, value], ...] pairs")
        return np.interp(x, pts[:, 0], pts[:, 1])
    n_terms = int(spec.get("n_terms", 8))
    coeffs = _rng(seed, stream).standard_normal(n_terms)
    k = np.arange(1, n_terms + 1)
    return amp * (np.sin(np.outer(x, k) * math.pi / length) @ (coeffs / k))


def load_spec(spec: Optional[Mapping[str, Any]]) -> LoadSpec:
    if spec is None:
        return LoadSpec()
    name = check_preset(spec, LOAD_PARAMS, "load")
    return LoadSpec(name, {k: v for k, v in spec.items() if k != "preset"})


__all__ = [
    "ELEMENT_PRESETS",
    "LOAD_PARAMS",
    "NODAL_PRESETS",
    "PresetError",
    "check_preset",
    "element_field",
    "load_spec",
    "nodal_field",
]
