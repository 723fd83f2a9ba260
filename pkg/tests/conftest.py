from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from fzwave.evolution import SchemeConfig, integrate
from fzwave.forcing import InitialData, LoadSpec, assemble_modal_source
from fzwave.memory import build_kernel_table
from fzwave.spatial import MaterialModel, solve_eigenpairs

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def two_layer_model(n=64, alpha=0.5, tau=0.5):
    xm = (np.arange(n) + 0.5) / n
    rho = np.where(xm < 0.5, 2.0, 1.0)
    mu = np.where(xm < 0.5, 1.0, 0.5)
    lam = np.full(n, 0.5)
    return MaterialModel(1.0, n, rho, mu, lam, alpha, tau)


def unit_model(n=64, alpha=0.5, tau=0.5, mu=0.5, lam=0.0, rho=1.0):
    return MaterialModel(1.0, n, rho, mu, lam, alpha, tau)


def run_modal(model, data, load=None, dt=1e-3, t_final=1.0, n_modes=8, scheme="trapezoid", basis=None, **kw):
    """Assemble and integrate one configuration; returns ``(traj, source, basis)``."""
    load = LoadSpec() if load is None else load
    basis = solve_eigenpairs(model, n_modes) if basis is None else basis
    cfg = SchemeConfig(dt, t_final, scheme, n_modes)
    table = build_kernel_table(model.alpha, 1.0, dt, cfg.n_steps)
    source = assemble_modal_source(data, load, basis, table, cfg.time_grid())
    traj = integrate(model, basis, data, source, table, cfg, **kw)
    return traj, source, basis


def generic_data(model, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    x = model.interior_nodes()
    g = scale * (0.1 * np.sin(np.pi * x) + 0.02 * rng.standard_normal(x.size) * np.sin(np.pi * x))
    h = scale * 0.2 * np.exp(-0.5 * ((x - 0.3) / 0.05) ** 2)
    s = scale * (0.05 + 0.01 * rng.standard_normal(model.n_elements))
    return InitialData(g, h, s)


PULSE = LoadSpec("gaussian-pulse", {"t0": 0.5, "sigma": 0.1, "profile": "gaussian", "center": 0.7, "width": 0.05})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
