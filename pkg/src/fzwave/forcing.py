"""Initial data, loads and the modal source functional.

The right-hand side of the evolution equation collects four terms

    G = (tau^a - 1) e_dot rho h  +  e Div kappa0  +  tau^a F  +  (tau^a - 1) (e_dot * F),
    kappa0 = tau^a s - (2 mu + lam) g'.

The divergence is paired weakly with each mode, ``<Div kappa0, phi> =
-(kappa0, phi')``.  The stepper consumes only the running integrals of the
modal source, which are computed from exact kernel identities:

    int_0^t e_dot = e(t) - 1,
    int_0^t (e_dot * F) = (e * F)(t) - int_0^t F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Tuple

import numpy as np

from .memory import KernelTable, causal_sum
from .mlf import e_kernel_derivative
from .spatial import MaterialModel, ModalBasis, check_nodal, element_gradient, full_mass


@dataclass(frozen=True)
class InitialData:
    """Displacement ``g`` and velocity ``h`` at interior nodes, stress ``s`` per element.

    With ``hookean_stress_flag`` the stored ``s`` is ignored and replaced by
    ``(2 mu + lam) g' / tau^a``.
    """

    g: np.ndarray
    h: np.ndarray
    s: np.ndarray
    hookean_stress_flag: bool = False

    def __post_init__(self) -> None:
        for name in ("g", "h", "s"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ValueError(f"initial data '{name}' must be a finite 1D array")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, model: MaterialModel) -> "InitialData":
        z = np.zeros(model.n_interior)
        return cls(z, z, np.zeros(model.n_elements))

    def check(self, model: MaterialModel) -> None:
        check_nodal(self.g, model)
        check_nodal(self.h, model)
        if self.s.shape[0] != model.n_elements:
            raise ValueError(
                f"initial stress has {self.s.shape[0]} values, mesh has {model.n_elements} elements"
            )

    def hooke_of_g(self, model: MaterialModel) -> np.ndarray:
        return model.stiffness_coefficient * element_gradient(self.g, model)

    def effective_stress(self, model: MaterialModel) -> np.ndarray:
        self.check(model)
        if self.hookean_stress_flag:
            return self.hooke_of_g(model) / model.tau_alpha
        return self.s

    def resolved(self, model: MaterialModel) -> "InitialData":
        """Equivalent data with the Hookean flag folded into ``s``."""
        if not self.hookean_stress_flag:
            return self
        return InitialData(self.g, self.h, self.effective_stress(model))

    def scaled(self, c: float, model: MaterialModel) -> "InitialData":
        d = self.resolved(model)
        return InitialData(c * d.g, c * d.h, c * d.s, self.hookean_stress_flag)

    def plus(self, other: "InitialData", model: MaterialModel) -> "InitialData":
        a, b = self.resolved(model), other.resolved(model)
        flag = self.hookean_stress_flag and other.hookean_stress_flag
        return InitialData(a.g + b.g, a.h + b.h, a.s + b.s, flag)


def compute_kappa0(data: InitialData, model: MaterialModel) -> np.ndarray:
    """``tau^a s - (2 mu + lam) g'`` per element; exactly zero for Hookean data."""
    data.check(model)
    if data.hookean_stress_flag:
        return np.zeros(model.n_elements)
    return model.tau_alpha * data.s - data.hooke_of_g(model)


# -- loads -------------------------------------------------------------------

LOAD_PRESETS = ("zero", "constant", "gaussian-pulse", "mode", "sum")
PROFILES = ("constant", "sine", "gaussian")


def _profile(params: Mapping, x: np.ndarray, length: float) -> np.ndarray:
    kind = params.get("profile", "sine")
    if kind == "constant":
        return np.ones_like(x)
    if kind == "sine":
        return np.sin(params.get("k", 1) * math.pi * x / length)
    if kind == "gaussian":
        center = params.get("center", 0.5 * length)
        width = params.get("width", 0.1 * length)
        return np.exp(-0.5 * ((x - center) / width) ** 2)
    raise ValueError(f"unknown load profile '{kind}', expected one of {PROFILES}")


@dataclass(frozen=True)
class LoadSpec:
    """Body load ``F(t, x)`` given by a named preset.

    Presets
    -------
    zero
    constant : ``value``
    gaussian-pulse : ``amplitude * exp(-(t - t0)^2 / (2 sigma^2)) * profile(x)``
        with ``profile`` one of constant, sine (``k``), gaussian (``center``, ``width``)
    mode : ``amplitude * cos(omega t) * sin(k pi x / L)``
    sum : ``sum_i c_i F_i`` over ``terms = ((c_i, LoadSpec_i), ...)``
    """

    kind: str = "zero"
    params: Mapping = field(default_factory=dict)
    terms: Tuple[Tuple[float, "LoadSpec"], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in LOAD_PRESETS:
            raise ValueError(f"unknown load preset '{self.kind}', expected one of {LOAD_PRESETS}")
        object.__setattr__(self, "params", dict(self.params))
        if self.kind == "gaussian-pulse":
            if not self.params.get("sigma", 1.0) > 0.0:
                raise ValueError("gaussian-pulse sigma must be positive")
            _profile(self.params, np.zeros(1), 1.0)

    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "sum":
            return all(c == 0.0 or f.is_zero for c, f in self.terms)
        return False

    def scaled(self, c: float) -> "LoadSpec":
        return LoadSpec("sum", terms=((float(c), self),))

    def __add__(self, other: "LoadSpec") -> "LoadSpec":
        return LoadSpec("sum", terms=((1.0, self), (1.0, other)))

    def __sub__(self, other: "LoadSpec") -> "LoadSpec":
        return LoadSpec("sum", terms=((1.0, self), (-1.0, other)))

    def evaluate(self, t: float, x: np.ndarray, length: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, float(p.get("value", 1.0)))
        if self.kind == "gaussian-pulse":
            amp = p.get("amplitude", 1.0)
            t0, sigma = p.get("t0", 0.0), p.get("sigma", 1.0)
            return amp * math.exp(-0.5 * ((t - t0) / sigma) ** 2) * _profile(p, x, length)
        if self.kind == "mode":
            amp, k, omega = p.get("amplitude", 1.0), p.get("k", 1), p.get("omega", 0.0)
            return amp * math.cos(omega * t) * np.sin(k * math.pi * x / length)
        total = np.zeros_like(x)
        for c, f in self.terms:
            if c != 0.0:
                total = total + c * f.evaluate(t, x, length)
        return total

    def sample(self, t_grid: np.ndarray, model: MaterialModel) -> np.ndarray:
        """Values at all mesh nodes, boundary included, shape ``(n_t, n_elements + 1)``."""
        x = model.nodes()
        out = np.array([self.evaluate(float(t), x, model.domain_length) for t in t_grid])
        if not np.all(np.isfinite(out)):
            raise ValueError("load produced non-finite values on the space-time grid")
        return out


# -- modal source ------------------------------------------------------------

TERM_NAMES = ("T1", "T2", "T3", "T4")


@dataclass(frozen=True)
class ModalSource:
    """Per-term source samples and running integrals, shape ``(4, n_t, n_modes)``.

    ``samples[:, 0]`` holds first-cell averages for terms whose kernel
    factor is singular at ``t = 0``.
    """

    t: np.ndarray
    samples: np.ndarray
    integrals: np.ndarray
    load_modal: np.ndarray
    kappa0: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.samples.sum(axis=0)

    @property
    def total_integral(self) -> np.ndarray:
        return self.integrals.sum(axis=0)

    def term(self, name: str) -> np.ndarray:
        return self.samples[TERM_NAMES.index(name)]

    def term_integral(self, name: str) -> np.ndarray:
        return self.integrals[TERM_NAMES.index(name)]


def modal_load(load_nodes: np.ndarray, basis: ModalBasis) -> np.ndarray:
    """``F_m(t_k) = int F phi_m`` with P1 interpolation of ``F``; shape ``(n_t, n_modes)``."""
    mass = full_mass(np.ones(basis.model.n_elements), basis.model.h)[1:-1, :]
    return (mass @ load_nodes.T).T @ basis.vectors


def assemble_modal_source(
    data: InitialData,
    load: LoadSpec,
    basis: ModalBasis,
    table: KernelTable,
    t_grid: np.ndarray,
) -> ModalSource:
    model = basis.model
    t_grid = np.asarray(t_grid, dtype=float)
    if not table.matches(t_grid):
        raise ValueError("time grid does not match the kernel table")
    data.check(model)
    n_t, m = t_grid.size, basis.n_modes
    ta = model.tau_alpha
    c1 = ta - 1.0
    dt = table.dt
    e = table.e_samples

    kappa0 = compute_kappa0(data, model)
    h_m = basis.project(data.h)
    k_m = (kappa0 * model.h) @ basis.mode_gradients()

    samples = np.zeros((4, n_t, m))
    integrals = np.zeros((4, n_t, m))

    if c1 != 0.0 and np.any(h_m != 0.0):
        de = np.empty(n_t)
        de[1:] = e_kernel_derivative(table.params, t_grid[1:])
        de[0] = (e[1] - 1.0) / dt
        samples[0] = c1 * np.outer(de, h_m)
        integrals[0] = c1 * np.outer(e - 1.0, h_m)

    if np.any(k_m != 0.0):
        samples[1] = -np.outer(e, k_m)
        integrals[1] = -np.outer(table.e_integrals, k_m)

    load_m = np.zeros((n_t, m))
    if not load.is_zero:
        load_m = modal_load(load.sample(t_grid, model), basis)
        cells = 0.5 * (load_m[1:] + load_m[:-1])
        f_int = np.concatenate([np.zeros((1, m)), np.cumsum(dt * cells, axis=0)])
        samples[2] = ta * load_m
        integrals[2] = ta * f_int
        if c1 != 0.0:
            samples[3] = -c1 * causal_sum(table.weights, cells)
            integrals[3] = c1 * (causal_sum(table.e_moments, cells) - f_int)

    return ModalSource(t_grid, samples, integrals, load_m, kappa0)


__all__ = [
    "InitialData",
    "LoadSpec",
    "ModalSource",
    "TERM_NAMES",
    "assemble_modal_source",
    "compute_kappa0",
    "modal_load",
]
