"""Run orchestration: assemble, eigensolve, integrate, post-process, write files."""

from __future__ import annotations

import csv
import json
import math
import sys
import time as _time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .diagnostics import (
    EnergyReport,
    Verdict,
    check_conservation,
    check_dissipation_sign,
    check_energy_inequality,
    energy_report,
)
from .evolution import ModalTrajectory, SchemeConfig, integrate, reconstruct_fields
from .forcing import InitialData, LoadSpec, assemble_modal_source, compute_kappa0
from .memory import KernelTable, build_kernel_table
from .presets import PresetError, element_field, load_spec, nodal_field
from .spatial import MaterialModel, ModalBasis, solve_eigenpairs
from .stress import StressSnapshot, discrete_kappa0, reconstruct_stress

SCHEMA = "fzwave-report/1"
ENERGY_HEADER = ["time", "kinetic", "strain_mu", "strain_lambda", "dissipation_lb", "total", "A_t", "bound"]
SNAPSHOT_HEADER = ["time", "x", "u", "u_dot", "strain"]
STRESS_HEADER = ["time", "element_midpoint_x", "sigma", "hooke_part", "memory_part", "relaxation_part"]
STUDY_QUANTITIES = ("energy_final", "u_norm_final", "dissipation_final")


@dataclass(frozen=True)
class Setup:
    model: MaterialModel
    basis: ModalBasis
    data: InitialData
    load: LoadSpec
    table: KernelTable
    scheme: SchemeConfig


def build_model(cfg: RunConfig) -> MaterialModel:
    mc = cfg.model
    fields = {}
    for key, spec in (("rho", mc.rho), ("mu", mc.mu), ("lambda", mc.lam)):
        try:
            vals = element_field(spec, mc.length, mc.n_elements, cfg.output.seed, key)
        except (PresetError, KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"model.{key}: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise ConfigError(f"model.{key}: non-finite coefficient values")
        if key in ("rho", "mu") and np.any(vals <= 0.0):
            raise ConfigError(
                f"model.{key}: coefficient must be bounded below by a positive constant "
                f"(min value {vals.min():g} <= 0)"
            )
        if key == "lambda" and np.any(vals < 0.0):
            raise ConfigError(f"model.lambda: coefficient must be nonnegative (min value {vals.min():g})")
        fields[key] = vals
    return MaterialModel(mc.length, mc.n_elements, fields["rho"], fields["mu"], fields["lambda"], mc.alpha, mc.tau)


def build_data(cfg: RunConfig, basis: ModalBasis) -> InitialData:
    dc, model, seed = cfg.data, basis.model, cfg.output.seed
    try:
        g = nodal_field(dc.g, basis, seed, "g")
        h = nodal_field(dc.h, basis, seed, "h")
        s = element_field(dc.s, model.domain_length, model.n_elements, seed, "s")
    except (PresetError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"data: {exc}") from None
    return InitialData(g, h, s, dc.hookean_stress)


def prepare(cfg: RunConfig) -> Setup:
    model = build_model(cfg)
    scheme = SchemeConfig(cfg.scheme.dt, cfg.scheme.t_final, cfg.scheme.scheme, cfg.scheme.n_modes)
    basis = solve_eigenpairs(model, scheme.n_modes)
    data = build_data(cfg, basis)
    try:
        load = load_spec(cfg.load)
    except (PresetError, ValueError) as exc:
        raise ConfigError(f"load: {exc}") from None
    table = build_kernel_table(model.alpha, 1.0, scheme.dt, scheme.n_steps)
    return Setup(model, basis, data, load, table, scheme)


def simulate(setup: Setup, data: Optional[InitialData] = None, load: Optional[LoadSpec] = None) -> ModalTrajectory:
    data = setup.data if data is None else data
    load = setup.load if load is None else load
    t = setup.scheme.time_grid()
    source = assemble_modal_source(data, load, setup.basis, setup.table, t)
    return integrate(setup.model, setup.basis, data, source, setup.table, setup.scheme)


def conservation_applicable(setup: Setup) -> bool:
    kappa0 = compute_kappa0(setup.data, setup.model)
    return setup.model.tau == 1.0 and not np.any(kappa0) and setup.load.is_zero


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_energy_csv(path: Path, report: EnergyReport) -> None:
    cols = [report.time, report.kinetic, report.strain_mu, report.strain_lambda,
            report.dissipation_lb, report.total, report.A_t, report.bound]
    _write_csv(path, ENERGY_HEADER, zip(*cols))


def write_snapshots_csv(path: Path, traj: ModalTrajectory, times: Sequence[float]) -> None:
    """One row per element midpoint, where P1 values and strains are exact."""
    xm = traj.model.midpoints()
    rows = []
    for snap in reconstruct_fields(traj, times):
        u = np.pad(snap.u, 1)
        ud = np.pad(snap.u_dot, 1)
        um, udm = 0.5 * (u[1:] + u[:-1]), 0.5 * (ud[1:] + ud[:-1])
        rows.extend(zip([snap.time] * xm.size, xm, um, udm, snap.strain))
    _write_csv(path, SNAPSHOT_HEADER, rows)


def write_stress_csv(path: Path, snaps: Sequence[StressSnapshot], xm: np.ndarray) -> None:
    rows = []
    for s in snaps:
        rows.extend(zip([s.time] * xm.size, xm, s.sigma, s.hooke_part, s.memory_part, s.relaxation_part))
    _write_csv(path, STRESS_HEADER, rows)


def _jsonable(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _verdict_entry(v: Optional[Verdict]) -> Dict[str, Any]:
    if v is None:
        return {"verdict": "skipped", "margin": None, "detail": "not applicable to this configuration"}
    return {"verdict": v.label, "margin": _jsonable(float(v.margin)), "detail": v.detail}


@dataclass
class RunResult:
    exit_status: int
    report: Dict[str, Any]
    energy: EnergyReport
    trajectory: ModalTrajectory
    stress: List[StressSnapshot]
    files: Dict[str, Path]


def stress_initial_check(snap0: StressSnapshot, s_eff: np.ndarray, tol: float = 1e-12) -> Verdict:
    err = float(np.max(np.abs(snap0.sigma - s_eff)))
    scale = max(1.0, float(np.max(np.abs(s_eff))))
    return Verdict("stress_initial", err <= tol * scale, err, f"max |sigma(0) - s| = {err:.3e}")


def run(cfg: RunConfig, out_dir: Optional[Path] = None) -> RunResult:
    start = _time.perf_counter()
    setup = prepare(cfg)
    traj = simulate(setup)
    energy = energy_report(traj, setup.data, setup.load)
    s_eff = setup.data.effective_stress(setup.model)
    stress = reconstruct_stress(traj, discrete_kappa0(traj, s_eff), setup.model)

    enabled = cfg.output.checks
    verdicts: Dict[str, Optional[Verdict]] = {}
    if "energy_inequality" in enabled:
        verdicts["energy_inequality"] = check_energy_inequality(energy, cfg.output.slack)
    if "dissipation_sign" in enabled:
        verdicts["dissipation_sign"] = check_dissipation_sign(energy)
    if "stress_initial" in enabled:
        verdicts["stress_initial"] = stress_initial_check(stress[0], s_eff)
    if "conservation" in enabled:
        verdicts["conservation"] = (
            check_conservation(energy, cfg.output.conservation_tol) if conservation_applicable(setup) else None
        )
    failed = [k for k, v in verdicts.items() if v is not None and not v.passed]
    exit_status = 1 if failed else 0

    report = {
        "schema": SCHEMA,
        "metadata": {
            "package": "fzwave",
            "version": __version__,
            "config_path": cfg.source,
            "n_steps": setup.scheme.n_steps,
            "n_modes": setup.scheme.n_modes,
            "eigenvalue_min": float(setup.basis.eigenvalues[0]),
            "eigenvalue_max": float(setup.basis.eigenvalues[-1]),
            "runtime_seconds": round(_time.perf_counter() - start, 3),
        },
        "parameters": cfg.to_dict(),
        "checks": {k: _verdict_entry(v) for k, v in verdicts.items()},
        "energy_summary": {
            "total_initial": float(energy.total[0]),
            "total_final": float(energy.total[-1]),
            "total_max": float(np.max(energy.total)),
            "dissipation_lb_final": float(energy.dissipation_lb[-1]),
            "A_final": float(energy.A_t[-1]),
            "bound_final": float(energy.bound[-1]),
            "max_lhs_over_bound": _jsonable(check_energy_inequality(energy).margin),
        },
        "exit_status": exit_status,
    }

    files: Dict[str, Path] = {}
    out = Path(cfg.output.directory) if out_dir is None else Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files["energy"] = out / "energy.csv"
    files["snapshots"] = out / "snapshots.csv"
    files["stress"] = out / "stress.csv"
    files["report"] = out / "report.json"
    write_energy_csv(files["energy"], energy)
    times = cfg.output.snapshot_times
    write_snapshots_csv(files["snapshots"], traj, times)
    idx = {traj.index_of(t) for t in times}
    write_stress_csv(files["stress"], [stress[k] for k in sorted(idx)], setup.model.midpoints())
    files["report"].write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")
    return RunResult(exit_status, report, energy, traj, stress, files)


def _level_config(cfg: RunConfig, level: int, refine_mesh: bool) -> RunConfig:
    scheme = replace(cfg.scheme, dt=cfg.scheme.dt / 2**level)
    model = cfg.model
    if refine_mesh:
        model = replace(model, n_elements=model.n_elements * 2**level)
    return replace(cfg, scheme=scheme, model=model)


def observed_orders(values: Sequence[float]) -> List[Optional[float]]:
    """``log2(|Q_l - Q_{l+1}| / |Q_{l+1} - Q_{l+2}|)`` for each ``l`` with two finer levels."""
    out: List[Optional[float]] = []
    for l in range(len(values)):
        if l + 2 >= len(values):
            out.append(None)
            continue
        d1 = abs(values[l] - values[l + 1])
        d2 = abs(values[l + 1] - values[l + 2])
        out.append(math.log2(d1 / d2) if d1 > 0.0 and d2 > 0.0 else None)
    return out


def convergence_study(
    cfg: RunConfig, levels: int, refine_mesh: bool = False, out_dir: Optional[Path] = None
) -> Dict[str, Any]:
    """Rerun with ``dt / 2**l`` for ``l < levels`` and report observed orders."""
    if levels < 1:
        raise ConfigError("levels must be >= 1")
    if levels < 3:
        print(f"warning: {levels} level(s) cannot produce an observed order; table is degenerate",
              file=sys.stderr)
    rows = []
    for level in range(levels):
        lcfg = _level_config(cfg, level, refine_mesh)
        setup = prepare(lcfg)
        traj = simulate(setup)
        energy = energy_report(traj, setup.data, setup.load)
        rows.append({
            "level": level,
            "dt": lcfg.scheme.dt,
            "n_elements": lcfg.model.n_elements,
            "energy_final": float(energy.total[-1]),
            "u_norm_final": float(np.sqrt(np.sum(traj.beta[-1] ** 2))),
            "dissipation_final": float(energy.dissipation_lb[-1]),
        })
    orders = {q: observed_orders([r[q] for r in rows]) for q in STUDY_QUANTITIES}
    for i, r in enumerate(rows):
        for q in STUDY_QUANTITIES:
            r[f"order_{q}"] = orders[q][i]

    out = Path(cfg.output.directory) if out_dir is None else Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ["level", "dt", "n_elements", *STUDY_QUANTITIES, *(f"order_{q}" for q in STUDY_QUANTITIES)]
    path = out / "study.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if r[h] is None else (r[h] if isinstance(r[h], int) else _fmt(r[h])) for h in header])
    return {"rows": rows, "path": path}


__all__ = [
    "ENERGY_HEADER",
    "RunResult",
    "SCHEMA",
    "SNAPSHOT_HEADER",
    "STRESS_HEADER",
    "Setup",
    "build_data",
    "build_model",
    "convergence_study",
    "observed_orders",
    "prepare",
    "run",
    "simulate",
]
