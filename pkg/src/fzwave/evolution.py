"""Modal time stepping of the once-integrated Volterra system.

Each mode obeys

    tau^a (gamma(t) - gamma(0)) + (1 - tau^a) (-e_dot * gamma)(t) + lam int_0^t beta = int_0^t G,
    beta(t) = beta(0) + int_0^t gamma.

The memory term uses product integration with cell values of ``gamma``
(``memory.convolve``); the two local integrals use the trapezoid rule (default)
or the rectangle rule of implicit Euler.  The newest memory weight and the
stiffness term are implicit, so each step solves a 2x2 system whose pivot

    tau^a + (1 - tau^a) w_0 / 2 + lam dt^2 / 4        (trapezoid)
    tau^a + (1 - tau^a) w_0     + lam dt^2            (implicit Euler)

is strictly positive.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .forcing import InitialData, ModalSource
from .memory import KernelTable
from .spatial import MaterialModel, ModalBasis

SCHEMES = ("trapezoid", "implicit-euler")
THREADS_ENV = "FZWAVE_THREADS"


class NumericalError(FloatingPointError):
    """A non-finite value appeared during time stepping."""


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    t_final: float
    scheme: str = "trapezoid"
    n_modes: int = 16

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.t_final > 0.0:
            raise ValueError("t_final must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme '{self.scheme}', expected one of {SCHEMES}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError("n_modes must be a positive integer")
        if abs(self.dt * self.n_steps - self.t_final) > 1e-12:
            raise ValueError(f"t_final={self.t_final} is not an integer multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def time_grid(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class ModalTrajectory:
    """Modal displacement, velocity and memory values, each ``(n_t, n_modes)``.

    ``memory[k]`` is the product-integration value of ``(-e_dot * gamma)(t_k)``.
    """

    t: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    memory: np.ndarray
    eigenvalues: np.ndarray
    scheme: str
    model: MaterialModel
    basis: ModalBasis
    table: KernelTable

    @property
    def dt(self) -> float:
        return self.table.dt

    def cell_velocity(self) -> np.ndarray:
        """Cell values of ``gamma`` seen by the memory sum, ``(n_t - 1, n_modes)``."""
        if self.scheme == "trapezoid":
            return 0.5 * (self.gamma[1:] + self.gamma[:-1])
        return self.gamma[1:]

    def combine(self, other: "ModalTrajectory", c: float = -1.0) -> "ModalTrajectory":
        """``self + c * other``; both trajectories must share grid and basis."""
        if self.beta.shape != other.beta.shape or self.scheme != other.scheme:
            raise ValueError("trajectories are not on the same grid")
        return replace(
            self,
            beta=self.beta + c * other.beta,
            gamma=self.gamma + c * other.gamma,
            memory=self.memory + c * other.memory,
        )

    def scaled(self, c: float) -> "ModalTrajectory":
        return replace(self, beta=c * self.beta, gamma=c * self.gamma, memory=c * self.memory)

    def index_of(self, time: float) -> int:
        k = int(round(time / self.dt))
        if k < 0 or k >= self.t.size or abs(self.t[k] - time) > 1e-9 * self.dt + 1e-12:
            raise ValueError(f"time {time} is not on the grid (dt={self.dt}, T={self.t[-1]})")
        return k


def _integrate_mode(
    lam: float,
    beta0: float,
    gamma0: float,
    g_int: np.ndarray,
    w_rev: np.ndarray,
    ta: float,
    dt: float,
    scheme: str,
    mode: int,
):
    n = g_int.size - 1
    c = 1.0 - ta
    w0 = w_rev[-1]
    beta = np.empty(n + 1)
    gamma = np.empty(n + 1)
    memory = np.zeros(n + 1)
    cells = np.empty(n)
    beta[0], gamma[0] = beta0, gamma0
    i_beta = 0.0
    trap = scheme == "trapezoid"
    if trap:
        pivot = ta + 0.5 * c * w0 + 0.25 * lam * dt * dt
    else:
        pivot = ta + c * w0 + lam * dt * dt
    nw = w_rev.size
    for k in range(1, n + 1):
        hist = float(np.dot(w_rev[nw - k : nw - 1], cells[: k - 1])) if (k > 1 and c != 0.0) else 0.0
        b_prev, g_prev = beta[k - 1], gamma[k - 1]
        if trap:
            rhs = (
                g_int[k]
                + ta * gamma0
                - c * (hist + 0.5 * w0 * g_prev)
                - lam * (i_beta + dt * b_prev + 0.25 * dt * dt * g_prev)
            )
            g_new = rhs / pivot
            b_new = b_prev + 0.5 * dt * (g_prev + g_new)
            i_beta += 0.5 * dt * (b_prev + b_new)
            cells[k - 1] = 0.5 * (g_prev + g_new)
        else:
            rhs = g_int[k] + ta * gamma0 - c * hist - lam * (i_beta + dt * b_prev)
            g_new = rhs / pivot
            b_new = b_prev + dt * g_new
            i_beta += dt * b_new
            cells[k - 1] = g_new
        if not (math.isfinite(g_new) and math.isfinite(b_new)):
            raise NumericalError(f"non-finite state at step {k} (t={k * dt:.6g}) in mode {mode}")
        beta[k], gamma[k] = b_new, g_new
        memory[k] = hist + w0 * cells[k - 1]
    return beta, gamma, memory


def _thread_count(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    return max(1, int(threads))


def integrate(
    model: MaterialModel,
    basis: ModalBasis,
    data: InitialData,
    source: ModalSource,
    table: KernelTable,
    cfg: SchemeConfig,
    mode_order: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
) -> ModalTrajectory:
    """Integrate every mode independently.

    Modes are processed in ``mode_order`` (default ascending), optionally on
    a thread pool sized by ``threads`` or the ``FZWAVE_THREADS`` environment
    variable.  Each mode's arithmetic is independent of the others, so the
    result does not depend on order or thread count.
    """
    m = cfg.n_modes
    if m > basis.n_modes:
        raise ValueError(f"n_modes={m} exceeds the basis size {basis.n_modes}")
    if source.total_integral.shape[1] < m:
        raise ValueError("modal source has fewer modes than requested")
    t = cfg.time_grid()
    if not table.matches(t) or source.t.size != t.size:
        raise ValueError("kernel table, source and scheme grids disagree")
    if abs(table.dt - cfg.dt) > 1e-15 * cfg.dt:
        raise ValueError("kernel table step differs from the scheme step")

    beta0 = basis.project(data.g)[:m]
    gamma0 = basis.project(data.h)[:m]
    g_int = np.ascontiguousarray(source.total_integral[:, :m].T)
    w_rev = np.ascontiguousarray(table.weights[::-1])
    ta = model.tau_alpha
    order: List[int] = list(range(m)) if mode_order is None else [int(j) for j in mode_order]
    if sorted(order) != list(range(m)):
        raise ValueError("mode_order must be a permutation of range(n_modes)")

    def work(j: int):
        return _integrate_mode(
            float(basis.eigenvalues[j]), float(beta0[j]), float(gamma0[j]),
            g_int[j], w_rev, ta, cfg.dt, cfg.scheme, j,
        )

    n_threads = _thread_count(threads)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = dict(zip(order, pool.map(work, order)))
    else:
        results = {j: work(j) for j in order}

    beta = np.column_stack([results[j][0] for j in range(m)])
    gamma = np.column_stack([results[j][1] for j in range(m)])
    memory = np.column_stack([results[j][2] for j in range(m)])
    return ModalTrajectory(
        t, beta, gamma, memory, basis.eigenvalues[:m].copy(), cfg.scheme, model, basis, table
    )


@dataclass(frozen=True)
class FieldSnapshot:
    time: float
    u: np.ndarray
    u_dot: np.ndarray
    strain: np.ndarray


def reconstruct_fields(traj: ModalTrajectory, times: Sequence[float]) -> List[FieldSnapshot]:
    """Nodal ``u``, ``u_dot`` and per-element strain at grid times."""
    m = traj.beta.shape[1]
    phi = traj.basis.vectors[:, :m]
    grad = traj.basis.mode_gradients()[:, :m]
    out = []
    for time in times:
        k = traj.index_of(float(time))
        out.append(
            FieldSnapshot(
                float(traj.t[k]),
                phi @ traj.beta[k],
                phi @ traj.gamma[k],
                grad @ traj.beta[k],
            )
        )
    return out


__all__ = [
    "FieldSnapshot",
    "ModalTrajectory",
    "NumericalError",
    "SCHEMES",
    "SchemeConfig",
    "THREADS_ENV",
    "integrate",
    "reconstruct_fields",
]
