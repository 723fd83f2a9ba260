"""Energy functionals, the Gronwall bound and convolution-inequality checks.

Energy terms at ``t_k`` are computed in modal coordinates:

    kinetic       = tau^a / 2 * sum gamma_m^2            (= tau^a/2 ||u_dot||^2_rho)
    strain_mu     = beta^T (Phi^T K_mu Phi) beta        (= ||u'||^2_mu)
    strain_lambda = 1/2 beta^T (Phi^T K_lam Phi) beta   (= 1/2 ||u'||^2_lam)

The dissipation lower bound is the discrete form of

    (1/2) (k * ||v||^2)(t) + (1/2) int_0^t k ||v||^2,    k = -e_dot,

with cell velocities ``v`` and the product-integration weights.  For
nonnegative nonincreasing weights, summation by parts shows that it never
exceeds the raw discrete dissipation ``sum_j (C_{j+1} - C_j) . v_j``.

The bound is ``A(t) exp(t + 1 - e(t))`` with

    A(t) = c_h/2 ||h||^2_rho + 3/2 ||g'||^2_mu + 1/2 ||g'||^2_lam
         + 3/2 ||kappa0||^2_{1/mu} + c_h int_0^t ||F||^2_{1/rho},
    c_h  = (tau^{2a} + (1 - tau^a)^2) / tau^a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .evolution import ModalTrajectory
from .forcing import InitialData, LoadSpec, compute_kappa0
from .memory import KernelTable, causal_sum
from .mlf import KernelParams, e_kernel
from .spatial import MaterialModel, element_gradient, full_mass

DEFAULT_SLACK = 1.01


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    @property
    def label(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class EnergyReport:
    """Energy series on the time grid; ``raw_dissipation`` is the unsymmetrised sum."""

    time: np.ndarray
    kinetic: np.ndarray
    strain_mu: np.ndarray
    strain_lambda: np.ndarray
    dissipation_lb: np.ndarray
    raw_dissipation: np.ndarray
    A_t: np.ndarray
    bound: np.ndarray
    verdicts: Dict[str, Verdict] = field(default_factory=dict)

    @property
    def total(self) -> np.ndarray:
        return self.kinetic + self.strain_mu + self.strain_lambda

    @property
    def lhs(self) -> np.ndarray:
        return self.total + self.dissipation_lb

    def scaled(self, c: float) -> "EnergyReport":
        """Energy terms multiplied by ``c``; the bound is unchanged."""
        return replace(
            self,
            kinetic=c * self.kinetic,
            strain_mu=c * self.strain_mu,
            strain_lambda=c * self.strain_lambda,
            dissipation_lb=c * self.dissipation_lb,
            raw_dissipation=c * self.raw_dissipation,
            verdicts={},
        )


def data_norms(data: InitialData, model: MaterialModel) -> Dict[str, float]:
    """Norms of the data fields entering ``A(t)``, by exact element quadrature."""
    h = model.h
    mass = full_mass(model.rho, h)[1:-1, 1:-1]
    grad_g = element_gradient(data.g, model)
    kappa0 = compute_kappa0(data, model)
    return {
        "h_rho": float(data.h @ (mass @ data.h)),
        "g_mu": float(np.sum(model.mu * grad_g**2) * h),
        "g_lam": float(np.sum(model.lam * grad_g**2) * h),
        "kappa0_inv_mu": float(np.sum(kappa0**2 / model.mu) * h),
    }


def load_norm_integral(load: LoadSpec, model: MaterialModel, t: np.ndarray) -> np.ndarray:
    """Running trapezoid integral of ``||F(t)||^2_{1/rho}``."""
    if load.is_zero:
        return np.zeros(t.size)
    f = load.sample(t, model)
    mass = full_mass(1.0 / model.rho, model.h)
    sq = np.einsum("ki,ki->k", f, (mass @ f.T).T)
    out = np.zeros(t.size)
    out[1:] = np.cumsum(0.5 * (sq[1:] + sq[:-1]) * np.diff(t))
    return out


def gronwall_A(data: InitialData, load: LoadSpec, model: MaterialModel, t: np.ndarray) -> np.ndarray:
    ta = model.tau_alpha
    c_h = (ta * ta + (1.0 - ta) ** 2) / ta
    nrm = data_norms(data, model)
    static = 0.5 * c_h * nrm["h_rho"] + 1.5 * nrm["g_mu"] + 0.5 * nrm["g_lam"] + 1.5 * nrm["kappa0_inv_mu"]
    return static + c_h * load_norm_integral(load, model, t)


def gronwall_factor(alpha: float, t: np.ndarray) -> np.ndarray:
    return np.exp(t + 1.0 - np.asarray(e_kernel(KernelParams(alpha, 1.0), t)))


def dissipation_terms(traj: ModalTrajectory, table: KernelTable) -> Tuple[np.ndarray, np.ndarray]:
    """``(dissipation_lb, raw_dissipation)`` at every grid time."""
    n_t = traj.t.size
    c = 1.0 - traj.model.tau_alpha
    if c == 0.0:
        return np.zeros(n_t), np.zeros(n_t)
    v = traj.cell_velocity()
    sq = np.einsum("km,km->k", v, v)
    w = table.weights[: n_t - 1]
    conv = causal_sum(w, sq)
    local = np.concatenate([[0.0], np.cumsum(w * sq)])
    lb = 0.5 * c * (conv + local)
    increments = np.einsum("km,km->k", np.diff(traj.memory, axis=0), v)
    raw = c * np.concatenate([[0.0], np.cumsum(increments)])
    return lb, raw


def energy_report(
    traj: ModalTrajectory,
    data: InitialData,
    load: LoadSpec,
    model: Optional[MaterialModel] = None,
    table: Optional[KernelTable] = None,
) -> EnergyReport:
    model = traj.model if model is None else model
    table = traj.table if table is None else table
    m = traj.beta.shape[1]
    mu_form, lam_form = traj.basis.strain_forms()
    mu_form, lam_form = mu_form[:m, :m], lam_form[:m, :m]
    kinetic = 0.5 * model.tau_alpha * np.einsum("km,km->k", traj.gamma, traj.gamma)
    strain_mu = np.einsum("km,mn,kn->k", traj.beta, mu_form, traj.beta)
    strain_lambda = 0.5 * np.einsum("km,mn,kn->k", traj.beta, lam_form, traj.beta)
    # roundoff in the quadratic forms can dip below zero for vanishing states
    strain_mu = np.maximum(strain_mu, 0.0)
    strain_lambda = np.maximum(strain_lambda, 0.0)
    lb, raw = dissipation_terms(traj, table)
    a_t = gronwall_A(data, load, model, traj.t)
    bound = a_t * gronwall_factor(model.alpha, traj.t)
    report = EnergyReport(traj.t, kinetic, strain_mu, strain_lambda, lb, raw, a_t, bound)
    for name, verdict in (
        ("energy_inequality", check_energy_inequality(report)),
        ("dissipation_sign", check_dissipation_sign(report)),
    ):
        report.verdicts[name] = verdict
    return report


def check_energy_inequality(report: EnergyReport, slack: float = DEFAULT_SLACK) -> Verdict:
    """Pass iff ``total + dissipation_lb <= slack * bound`` at every grid time.

    The margin is the largest ratio ``lhs / bound`` (0 when both vanish).
    """
    if slack < 1.0:
        raise ValueError("slack must be >= 1")
    lhs, bound = report.lhs, report.bound
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(bound))):
        return Verdict("energy_inequality", False, math.inf, "non-finite energy terms")
    ok = lhs <= slack * bound
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0.0, lhs / bound, np.where(lhs > 0.0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    detail = f"max lhs/bound = {ratio[worst]:.6g} at t = {report.time[worst]:.6g}"
    return Verdict("energy_inequality", bool(np.all(ok)), float(ratio[worst]), detail)


def check_dissipation_sign(report: EnergyReport, rel_tol: float = 1e-8) -> Verdict:
    """Lower bound exactly nonnegative; raw dissipation above ``-rel_tol * peak energy``."""
    peak = float(np.max(report.total)) if report.total.size else 0.0
    tol = rel_tol * peak
    lb_ok = bool(np.all(report.dissipation_lb >= 0.0))
    raw_min = float(np.min(report.raw_dissipation))
    raw_ok = raw_min >= -tol
    ordered = bool(np.all(report.raw_dissipation >= report.dissipation_lb - tol))
    detail = f"min raw dissipation {raw_min:.3e}, tol {tol:.3e}"
    return Verdict("dissipation_sign", lb_ok and raw_ok and ordered, raw_min, detail)


def check_conservation(report: EnergyReport, tol: float = 1e-3) -> Verdict:
    e0 = float(report.total[0])
    if e0 == 0.0:
        drift = float(np.max(np.abs(report.total)))
    else:
        drift = float(np.max(np.abs(report.total - e0)) / abs(e0))
    return Verdict("conservation", drift <= tol, drift, f"max relative drift {drift:.3e}")


def _validate_kernel(weights: np.ndarray) -> None:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("kernel weights must be nonnegative")
    if np.any(np.diff(w) > 0.0):
        raise ValueError("kernel weights must be nonincreasing")


def lemma1_sides(v, weights) -> Tuple[float, float]:
    """``(lhs, rhs)`` of the discrete dissipation inequality at the last step.

    ``v`` holds cell values ``(n, ...)``; ``C_j = sum_{k<j} w_{j-1-k} v_k``,
    ``lhs = sum_j (C_{j+1} - C_j) . v_j`` and
    ``rhs = 1/2 sum_j (w_{n-1-j} + w_j) |v_j|^2``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    w = np.asarray(weights, dtype=float)[:n]
    flat = v.reshape(n, -1)
    conv = causal_sum(w, flat)
    lhs = float(np.sum(np.diff(conv, axis=0) * flat))
    sq = np.einsum("ki,ki->k", flat, flat)
    rhs = 0.5 * float(np.dot(w[::-1], sq) + np.dot(w, sq))
    return lhs, rhs


def lemma1_check(v, table: KernelTable, t_index: Optional[int] = None, tol: float = 1e-8) -> Verdict:
    """Discrete dissipation lower bound with ``k = -e_dot`` on cells ``0..t_index-1``."""
    weights = table.weights if isinstance(table, KernelTable) else np.asarray(table, dtype=float)
    _validate_kernel(weights)
    v = np.asarray(v, dtype=float)
    n = v.shape[0] if t_index is None else int(t_index)
    if not (0 <= n <= min(v.shape[0], weights.size)):
        raise IndexError("t_index outside the history")
    lhs, rhs = lemma1_sides(v[:n], weights)
    scale = 1.0 + float(np.sum(v[:n] ** 2))
    margin = lhs - rhs
    return Verdict("lemma1", margin >= -tol * scale, margin, f"lhs={lhs:.6e}, rhs={rhs:.6e}")


def _validate_exponents(p: float, q: float, r: float) -> None:
    for name, val in (("p", p), ("q", q), ("r", r)):
        if not val >= 1.0:
            raise ValueError(f"exponent {name}={val} must lie in [1, inf]")
    if abs(1.0 / p + 1.0 / q - 1.0 - 1.0 / r) > 1e-12:
        raise ValueError(f"exponents violate 1/p + 1/q - 1 = 1/r: ({p}, {q}, {r})")


def grid_norm(f: np.ndarray, p: float, dt: float) -> float:
    f = np.abs(np.asarray(f, dtype=float))
    if math.isinf(p):
        return float(np.max(f)) if f.size else 0.0
    return float((dt * np.sum(f**p)) ** (1.0 / p))


def grid_convolution(f, g, dt: float) -> np.ndarray:
    """``c_j = dt sum_{k<=j} f_{j-k} g_k``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return dt * np.convolve(f, g)[: min(f.size, g.size)]


def lemma2_check(f, g, p: float, q: float, r: float, dt: float = 1.0, slack: float = 1e-12) -> Verdict:
    """Discrete Young inequality ``||f * g||_r <= (1 + slack) ||f||_p ||g||_q``.

    With rectangle-rule norms the inequality holds exactly for grid
    functions, so ``slack`` only absorbs roundoff.
    """
    _validate_exponents(p, q, r)
    lhs = grid_norm(grid_convolution(f, g, dt), r, dt)
    rhs = grid_norm(f, p, dt) * grid_norm(g, q, dt)
    return Verdict("lemma2", lhs <= (1.0 + slack) * rhs + 1e-300, rhs - lhs, f"lhs={lhs:.6e}, rhs={rhs:.6e}")


Runner = Callable[[InitialData, LoadSpec], ModalTrajectory]


def perturbation_bound_check(
    base: Tuple[InitialData, LoadSpec],
    perturbation: Tuple[InitialData, LoadSpec],
    runner: Runner,
    slack: float = DEFAULT_SLACK,
) -> Tuple[Verdict, EnergyReport]:
    """Energy inequality for the difference of a perturbed and a base run.

    The difference trajectory is formed by subtraction; its bound uses
    ``A`` built from the perturbation data alone.
    """
    base_data, base_load = base
    dp, lp = perturbation
    traj_b = runner(base_data, base_load)
    model = traj_b.model
    pert_data = base_data.plus(dp, model)
    traj_p = runner(pert_data, base_load + lp)
    diff = traj_p.combine(traj_b, -1.0)
    report = energy_report(diff, dp, lp)
    verdict = check_energy_inequality(report, slack)
    return replace(verdict, name="perturbation_bound"), report


__all__ = [
    "DEFAULT_SLACK",
    "EnergyReport",
    "Verdict",
    "check_conservation",
    "check_dissipation_sign",
    "check_energy_inequality",
    "data_norms",
    "dissipation_terms",
    "energy_report",
    "gronwall_A",
    "gronwall_factor",
    "grid_convolution",
    "grid_norm",
    "lemma1_check",
    "lemma1_sides",
    "lemma2_check",
    "perturbation_bound_check",
]
