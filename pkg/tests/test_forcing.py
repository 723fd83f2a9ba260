from __future__ import annotations

import math

import numpy as np
import pytest

from fzwave.forcing import InitialData, LoadSpec, assemble_modal_source, compute_kappa0
from fzwave.memory import build_kernel_table
from fzwave.mlf import KernelParams, e_kernel_derivative, e_kernel_integral
from fzwave.spatial import MaterialModel, solve_eigenpairs
from conftest import PULSE, generic_data, two_layer_model, unit_model
from oracles import memory_oracle


def _source(model, data, load, n_modes=6, dt=0.01, n=100):
    basis = solve_eigenpairs(model, n_modes)
    table = build_kernel_table(model.alpha, 1.0, dt, n)
    return assemble_modal_source(data, load, basis, table, table.times), basis, table


def test_hookean_kappa0_is_zero():
    model = two_layer_model(n=32)
    d = generic_data(model)
    flagged = InitialData(d.g, d.h, d.s, hookean_stress_flag=True)
    assert np.all(compute_kappa0(flagged, model) == 0.0)


def test_kappa0_simple():
    model = unit_model(n=8, tau=1.0)
    d = InitialData(np.zeros(7), np.zeros(7), np.ones(8))
    assert np.all(compute_kappa0(d, model) == 1.0)


def test_kappa0_two_layer_linear_g():
    # hand computation: g = x on interior nodes has slope 1 except in the last element
    n = 4
    xm = (np.arange(n) + 0.5) / n
    mu = np.where(xm < 0.5, 1.0, 0.25)
    model = MaterialModel(1.0, n, 1.0, mu, 0.5, 0.5, 0.5)
    g = model.interior_nodes()
    s = np.array([1.0, 2.0, 3.0, 4.0])
    ta = 0.5**0.5
    slope = np.array([1.0, 1.0, 1.0, -3.0])
    expected = ta * s - (2 * mu + 0.5) * slope
    got = compute_kappa0(InitialData(g, np.zeros(3), s), model)
    assert np.allclose(got, expected, atol=1e-14)


def test_source_vanishes_when_every_factor_vanishes():
    model = two_layer_model(n=32, tau=1.0)
    d = generic_data(model)
    data = InitialData(d.g, np.zeros(31), d.s, hookean_stress_flag=True)
    src, _, _ = _source(model, data, LoadSpec())
    assert np.all(src.samples == 0.0) and np.all(src.integrals == 0.0)


def test_velocity_mode_source():
    model = two_layer_model(n=32, alpha=0.6, tau=0.4)
    basis = solve_eigenpairs(model, 6)
    data = InitialData(np.zeros(31), basis.vectors[:, 0], model.tau_alpha * np.zeros(32))
    src, _, table = _source(model, data, LoadSpec())
    c1 = model.tau_alpha - 1.0
    de = e_kernel_derivative(KernelParams(0.6, 1.0), table.times[1:])
    assert np.allclose(src.total[1:, 0], c1 * de, rtol=1e-10, atol=1e-14)
    assert np.max(np.abs(src.total[:, 1:])) < 1e-10
    # running integral of e_dot is e(t) - 1 exactly
    assert np.max(np.abs(src.term_integral("T1")[:, 0] - c1 * (table.e_samples - 1.0))) <= 1e-15


def test_term_isolation():
    model = two_layer_model(n=32, tau=1.0)
    src, _, _ = _source(model, generic_data(model), PULSE)
    assert np.all(src.term("T1") == 0.0) and np.all(src.term("T4") == 0.0)
    model = two_layer_model(n=32, tau=0.5)
    src, _, _ = _source(model, generic_data(model), LoadSpec())
    assert np.all(src.term("T3") == 0.0) and np.all(src.term("T4") == 0.0)
    d = generic_data(model)
    src, _, _ = _source(model, InitialData(d.g, d.h, d.s, True), PULSE)
    assert np.all(src.term("T2") == 0.0)


def test_memory_load_integral_matches_quadrature():
    # F = cos(w t) sin(pi x): with G(r) = int_0^r F_1, swapping the order gives
    # int_0^1 (e_dot * F_1) = int_0^1 e_dot(u) G(1 - u) du
    alpha, tau, w = 0.5, 0.5, 3.0
    model = unit_model(n=128, alpha=alpha, tau=tau, mu=0.5)
    load = LoadSpec("mode", {"k": 1, "amplitude": 1.0, "omega": w})
    src, basis, table = _source(model, InitialData.zeros(model), load, n_modes=3, dt=1e-3, n=1000)
    f1 = src.load_modal[0, 0]
    c1 = model.tau_alpha - 1.0
    ref = -memory_oracle(lambda r: f1 * math.sin(w * r) / w, 1.0, alpha)
    assert src.term_integral("T4")[-1, 0] / c1 == pytest.approx(ref, abs=1e-6)


def test_constant_load_integral_identity():
    alpha = 0.7
    model = unit_model(n=32, alpha=alpha, tau=0.5)
    load = LoadSpec("mode", {"k": 1})
    src, basis, table = _source(model, InitialData.zeros(model), load, n_modes=2, dt=0.01, n=100)
    f1 = src.load_modal[0, 0]
    c1 = model.tau_alpha - 1.0
    e_int = e_kernel_integral(KernelParams(alpha, 1.0), table.times)
    assert np.max(np.abs(src.term_integral("T4")[:, 0] / c1 - f1 * (e_int - table.times))) <= 1e-13


def test_load_point_samples():
    model = unit_model(n=16)
    load = LoadSpec("constant", {"value": 2.0})
    src, basis, table = _source(model, InitialData.zeros(model), load, n_modes=4, dt=0.1, n=5)
    # int 2 phi_m with P1 interpolation of a constant is exact
    mass_row = 2.0 * np.full(15, model.h)
    assert np.allclose(src.load_modal[3], mass_row @ basis.vectors, atol=1e-14)


def test_grid_mismatch():
    model = unit_model(n=16)
    basis = solve_eigenpairs(model, 4)
    table = build_kernel_table(0.5, 1.0, 0.1, 5)
    with pytest.raises(ValueError, match="grid"):
        assemble_modal_source(InitialData.zeros(model), LoadSpec(), basis, table, np.linspace(0, 1, 7))


def test_load_algebra():
    x = np.linspace(0.0, 1.0, 11)
    a = LoadSpec("mode", {"k": 2, "amplitude": 1.5, "omega": 3.0})
    b = PULSE
    combo = a.scaled(2.0) - b
    assert np.allclose(combo.evaluate(0.4, x, 1.0), 2.0 * a.evaluate(0.4, x, 1.0) - b.evaluate(0.4, x, 1.0))
    assert LoadSpec().scaled(3.0).is_zero
    with pytest.raises(ValueError):
        LoadSpec("bogus")
    with pytest.raises(ValueError):
        LoadSpec("gaussian-pulse", {"sigma": 0.0})


def test_initial_data_algebra():
    model = two_layer_model(n=16)
    d = generic_data(model)
    hk = InitialData(d.g, d.h, d.s, True)
    both = hk.plus(d, model)
    assert not both.hookean_stress_flag
    assert np.allclose(both.s, hk.effective_stress(model) + d.s)
    with pytest.raises(ValueError):
        InitialData(np.zeros(3), np.zeros(3), np.zeros(4)).check(model)
