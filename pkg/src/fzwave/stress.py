"""Stress reconstruction from the displacement history.

With ``e_s = e_a(., tau^-a)`` and ``A2 = (2 mu + lam) u'``,

    tau^a sigma = (1 - tau^a) (e_s_dot * A2) + A2 + e_s kappa0 =: A1 + A2 + A3.

For a piecewise-linear history of ``A2`` we integrate by parts,

    (e_s_dot * A2)(t) = e_s(t) A2(0) - A2(t) + (e_s * A2_dot)(t),

and ``(e_s * A2_dot)`` is a sum of exact cell moments of ``e_s`` times the
constant slopes of ``A2``.  Nothing singular is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .evolution import ModalTrajectory
from .memory import KernelTable, build_kernel_table, causal_sum


@dataclass(frozen=True)
class StressSnapshot:
    time: float
    sigma: np.ndarray
    hooke_part: np.ndarray
    memory_part: np.ndarray
    relaxation_part: np.ndarray


def stress_kernel_table(traj: ModalTrajectory) -> KernelTable:
    model = traj.model
    return build_kernel_table(model.alpha, model.tau ** (-model.alpha), traj.dt, traj.t.size - 1)


def hooke_history(traj: ModalTrajectory) -> np.ndarray:
    """``A2(t_k)`` per element, shape ``(n_t, n_elements)``."""
    m = traj.beta.shape[1]
    grad = traj.basis.mode_gradients()[:, :m]
    return (traj.beta @ grad.T) * traj.model.stiffness_coefficient


def discrete_kappa0(traj: ModalTrajectory, s: np.ndarray) -> np.ndarray:
    """``tau^a s - A2(0)`` using the projected initial displacement.

    Differs from the continuous ``kappa0`` only when ``g`` lies outside the
    modal span; with it, ``sigma(0) = s`` holds to roundoff.
    """
    return traj.model.tau_alpha * np.asarray(s, dtype=float) - hooke_history(traj)[0]


def stress_history(
    traj: ModalTrajectory, kappa0, table: Optional[KernelTable] = None
):
    """``(A1, A2, A3)`` at every grid time, each ``(n_t, n_elements)``."""
    model = traj.model
    kappa0 = np.asarray(kappa0, dtype=float)
    if kappa0.shape != (model.n_elements,):
        raise ValueError("kappa0 must hold one value per element")
    if table is None:
        table = stress_kernel_table(traj)
    if table.n_steps < traj.t.size - 1 or abs(table.dt - traj.dt) > 1e-15 * traj.dt:
        raise ValueError("stress kernel table does not cover the trajectory")
    n_t = traj.t.size
    e = table.e_samples[:n_t]
    a2 = hooke_history(traj)
    c = 1.0 - model.tau_alpha
    if c != 0.0:
        slopes = np.diff(a2, axis=0) / traj.dt
        conv = causal_sum(table.e_moments, slopes)
        a1 = c * (np.outer(e, a2[0]) - a2 + conv)
        a1[0] = 0.0
    else:
        a1 = np.zeros_like(a2)
    a3 = np.outer(e, kappa0)
    return a1, a2, a3


def reconstruct_stress(
    traj: ModalTrajectory,
    kappa0,
    model=None,
    times: Optional[Sequence[float]] = None,
    table: Optional[KernelTable] = None,
) -> List[StressSnapshot]:
    """Stress snapshots at the requested grid times (default: all)."""
    if model is not None and model is not traj.model:
        if model.n_elements != traj.model.n_elements:
            raise ValueError("model mesh differs from the trajectory mesh")
    if times is None:
        idx = list(range(traj.t.size))
    else:
        idx = [traj.index_of(float(t)) for t in times]
    a1, a2, a3 = stress_history(traj, kappa0, table)
    ta = traj.model.tau_alpha
    out = []
    for k in idx:
        out.append(
            StressSnapshot(
                float(traj.t[k]),
                (a1[k] + a2[k] + a3[k]) / ta,
                a2[k],
                a1[k],
                a3[k],
            )
        )
    return out


__all__ = [
    "StressSnapshot",
    "discrete_kappa0",
    "hooke_history",
    "reconstruct_stress",
    "stress_history",
    "stress_kernel_table",
]
