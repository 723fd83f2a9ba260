from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fzwave.diagnostics import (
    check_conservation,
    check_dissipation_sign,
    check_energy_inequality,
    energy_report,
    gronwall_factor,
    grid_convolution,
    lemma1_check,
    lemma1_sides,
    lemma2_check,
    perturbation_bound_check,
)
from fzwave.forcing import InitialData, LoadSpec
from fzwave.memory import build_kernel_table
from fzwave.mlf import KernelParams, e_kernel
from fzwave.spatial import energy_norms, solve_eigenpairs
from fzwave.suites import LEMMA1_ALPHAS, LEMMA2_TRIPLES, lemma1_suite, lemma2_suite, negative_controls
from conftest import PULSE, generic_data, run_modal, two_layer_model, unit_model


def _generic_report(alpha=0.5, tau=0.5, dt=2e-3, t_final=1.0):
    model = two_layer_model(n=64, alpha=alpha, tau=tau)
    data = generic_data(model)
    traj, _, _ = run_modal(model, data, PULSE, dt=dt, t_final=t_final, n_modes=16)
    return energy_report(traj, data, PULSE), traj, data


def test_zero_everything():
    model = two_layer_model(n=32)
    data = InitialData.zeros(model)
    traj, _, _ = run_modal(model, data, dt=0.01, t_final=1.0, n_modes=4)
    rep = energy_report(traj, data, LoadSpec())
    for arr in (rep.kinetic, rep.strain_mu, rep.strain_lambda, rep.dissipation_lb, rep.A_t, rep.bound):
        assert np.all(arr == 0.0)
    assert all(v.passed for v in rep.verdicts.values())


def test_conservation_case():
    model = unit_model(n=64, alpha=0.5, tau=1.0, mu=0.5)
    x = model.interior_nodes()
    data = InitialData(np.sin(np.pi * x), np.zeros(x.size), np.zeros(64), hookean_stress_flag=True)
    traj, _, _ = run_modal(model, data, dt=1e-3, t_final=2.0, n_modes=8)
    rep = energy_report(traj, data, LoadSpec())
    assert check_conservation(rep, 1e-3).passed
    v = check_energy_inequality(rep)
    # at t = 0 the factor is 1 and A counts 3/2 of the strain energy
    assert v.passed and v.margin == pytest.approx(2.0 / 3.0, rel=1e-3)
    assert rep.lhs[-1] / rep.bound[-1] < 0.1


def test_conservation_drift_scales_with_dt():
    # report the constant C in |E - E0| / E0 <= C dt
    model = two_layer_model(n=32, tau=1.0)
    d = generic_data(model)
    data = InitialData(d.g, d.h, d.s, hookean_stress_flag=True)
    for dt in (4e-3, 1e-3):
        traj, _, _ = run_modal(model, data, dt=dt, t_final=1.0, n_modes=8)
        drift = check_conservation(energy_report(traj, data, LoadSpec())).margin
        assert drift <= 1e-3 * dt


def test_modal_energy_matches_element_quadrature():
    rep, traj, _ = _generic_report(t_final=0.2)
    model = traj.model
    phi = traj.basis.vectors[:, : traj.beta.shape[1]]
    for k in (0, 50, 100):
        l2, s2mu, slam = energy_norms(phi @ traj.gamma[k], model)
        assert rep.kinetic[k] == pytest.approx(0.5 * model.tau_alpha * l2, rel=1e-10)
        _, s2mu, slam = energy_norms(phi @ traj.beta[k], model)
        assert rep.strain_mu[k] == pytest.approx(0.5 * s2mu, rel=1e-10)
        assert rep.strain_lambda[k] == pytest.approx(0.5 * slam, rel=1e-10, abs=1e-18)


def test_generic_inequality_and_corrupted_negative_control():
    rep, _, _ = _generic_report()
    assert rep.verdicts["energy_inequality"].passed
    assert rep.verdicts["dissipation_sign"].passed
    assert np.all(rep.dissipation_lb >= 0.0)
    assert np.all(rep.raw_dissipation >= rep.dissipation_lb - 1e-12)
    ratio = rep.verdicts["energy_inequality"].margin
    bad = rep.scaled(1.02 * 1.01 / ratio)
    assert not check_energy_inequality(bad).passed
    assert not check_energy_inequality(rep.scaled(10.0 / ratio)).passed


def test_A_monotone_and_bound_audit():
    rep, _, _ = _generic_report()
    assert np.all(np.diff(rep.A_t) >= 0.0)
    factor = np.exp(rep.time + 1.0 - np.asarray(e_kernel(KernelParams(0.5, 1.0), rep.time)))
    assert np.max(np.abs(rep.bound / rep.A_t - factor) / factor) <= 1e-12
    assert np.allclose(gronwall_factor(0.5, rep.time), factor, rtol=1e-15)


def test_dissipation_sign_negative_control():
    rep, _, _ = _generic_report(t_final=0.2)
    bad = rep.scaled(1.0)
    object.__setattr__(bad, "raw_dissipation", -np.abs(rep.raw_dissipation) - 1.0)
    assert not check_dissipation_sign(bad).passed


def test_slack_validation():
    rep, _, _ = _generic_report(t_final=0.1)
    with pytest.raises(ValueError):
        check_energy_inequality(rep, slack=0.5)


# -- Lemma 1 -------------------------------------------------------------------


@pytest.mark.parametrize("alpha", LEMMA1_ALPHAS)
def test_lemma1_suite(alpha):
    res = lemma1_suite(2024, alpha, trials=100)
    assert res.n_pass == 100


def test_lemma1_constant_closed_form():
    # v = c: lhs telescopes to c^2 (1 - e(t_n)), rhs equals the same sum
    table = build_kernel_table(0.5, 1.0, 0.01, 100)
    c = 1.7
    lhs, rhs = lemma1_sides(np.full(100, c), table.weights)
    expected = c * c * (1.0 - table.e_samples[100])
    assert lhs == pytest.approx(expected, rel=1e-13)
    assert rhs == pytest.approx(expected, rel=1e-13)
    assert lemma1_check(np.full(100, c), table).passed


def test_lemma1_zero_and_index():
    table = build_kernel_table(0.7, 1.0, 0.01, 50)
    v = lemma1_check(np.zeros((50, 2)), table)
    assert v.passed and v.margin == 0.0
    with pytest.raises(IndexError):
        lemma1_check(np.zeros(50), table, t_index=60)


def test_lemma1_rejects_bad_kernels():
    table = build_kernel_table(0.5, 1.0, 0.01, 50)
    with pytest.raises(ValueError, match="nonnegative"):
        lemma1_check(np.ones(50), -table.weights)
    with pytest.raises(ValueError, match="nonincreasing"):
        lemma1_check(np.ones(50), table.weights[::-1])


@given(seed=st.integers(0, 2**31), alpha=st.floats(0.1, 1.0))
def test_lemma1_hypothesis(seed, alpha):
    table = build_kernel_table(alpha, 1.0, 0.02, 80)
    v = np.random.default_rng(seed).standard_normal((80, 2))
    assert lemma1_check(v, table).passed


# -- Lemma 2 -------------------------------------------------------------------


@pytest.mark.parametrize("triple", LEMMA2_TRIPLES)
def test_lemma2_suite(triple):
    assert lemma2_suite(2024, triple, trials=100).n_pass == 100


def test_lemma2_spike_is_shift():
    dt = 0.1
    f = np.zeros(20)
    f[0] = 1.0 / dt
    g = np.random.default_rng(3).standard_normal(20)
    assert np.allclose(grid_convolution(f, g, dt), g, atol=1e-15)
    v = lemma2_check(f, g, 1.0, 2.0, 2.0, dt)
    assert v.passed and abs(v.margin) <= 1e-12


def test_lemma2_ones_closed_form():
    n = 1000
    dt = 1.0 / n
    ones = np.ones(n)
    conv = grid_convolution(ones, ones, dt)
    assert np.allclose(conv, dt * np.arange(1, n + 1))
    v = lemma2_check(ones, ones, 1.0, math.inf, math.inf, dt)
    assert v.passed and v.margin == pytest.approx(0.0, abs=1e-12)


def test_lemma2_and_controls_reject():
    with pytest.raises(ValueError, match="1/p"):
        lemma2_check(np.ones(4), np.ones(4), 2.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        lemma2_check(np.ones(4), np.ones(4), 0.5, 2.0, 2.0)
    assert all(ok for _, ok in negative_controls())


# -- continuous dependence -----------------------------------------------------


def _runner(model, basis, dt=2e-3, t_final=1.0):
    def run(data, load):
        return run_modal(model, data, load, dt=dt, t_final=t_final, n_modes=basis.n_modes, basis=basis)[0]

    return run


def _perturbation(model, scale, seed=9):
    rng = np.random.default_rng(seed)
    x = model.interior_nodes()
    bump = np.sin(np.pi * x)
    return InitialData(
        scale * rng.standard_normal(x.size) * bump,
        scale * rng.standard_normal(x.size) * bump,
        scale * rng.standard_normal(model.n_elements),
    )


def test_perturbation_bound_and_quadratic_scaling():
    model = two_layer_model(n=64)
    basis = solve_eigenpairs(model, 16)
    base = (generic_data(model), PULSE)
    runner = _runner(model, basis)
    v1, r1 = perturbation_bound_check(base, (_perturbation(model, 1e-3), LoadSpec()), runner)
    v2, r2 = perturbation_bound_check(base, (_perturbation(model, 5e-4), LoadSpec()), runner)
    assert v1.passed and v2.passed
    ratio = r1.lhs[-1] / r2.lhs[-1]
    assert ratio == pytest.approx(4.0, abs=0.1)


def test_perturbation_zero_and_load_only():
    model = two_layer_model(n=64)
    basis = solve_eigenpairs(model, 16)
    base = (generic_data(model), PULSE)
    runner = _runner(model, basis, t_final=0.6)
    v0, r0 = perturbation_bound_check(base, (InitialData.zeros(model), LoadSpec()), runner)
    assert v0.passed and np.all(r0.lhs == 0.0)
    lp = LoadSpec("mode", {"k": 3, "amplitude": 0.01, "omega": 4.0})
    vf, rf = perturbation_bound_check(base, (InitialData.zeros(model), lp), runner)
    assert vf.passed and rf.lhs[-1] > 0.0
