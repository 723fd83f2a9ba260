from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
import sympy as sym
from hypothesis import given
from hypothesis import strategies as st

from fzwave.spatial import MaterialModel, assemble, energy_norms, solve_eigenpairs
from conftest import two_layer_model, unit_model


def test_stiffness_pattern_constant():
    model = MaterialModel(1.0, 4, 1.0, 0.5, 0.0, 0.5, 0.5)
    _, k = assemble(model)
    h = 0.25
    expected = (1.0 / h) * (2 * np.eye(3) - np.eye(3, k=1) - np.eye(3, k=-1))
    assert np.allclose(k.toarray(), expected, atol=1e-14)


def test_interior_row_sums_vanish():
    _, k = assemble(unit_model(n=16, mu=0.7, lam=0.3))
    rows = k.toarray().sum(axis=1)
    assert np.allclose(rows[1:-1], 0.0, atol=1e-12)


def test_mass_matches_symbolic_integrals():
    n = 6
    model = two_layer_model(n=n)
    m, _ = assemble(model)
    x = sym.symbols("x")
    h = sym.Rational(1, n)
    full = sym.zeros(n + 1, n + 1)
    for e in range(n):
        left, right = e * h, (e + 1) * h
        rho = 2 if left < sym.Rational(1, 2) else 1
        local = [(right - x) / h, (x - left) / h]
        for a in range(2):
            for b in range(2):
                full[e + a, e + b] += sym.integrate(rho * local[a] * local[b], (x, left, right))
    ref = np.array(full[1:-1, 1:-1].evalf(), dtype=float)
    assert np.allclose(m.toarray(), ref, atol=1e-14)


def test_matrices_exactly_symmetric():
    m, k = assemble(two_layer_model(n=33))
    assert (abs(m - m.T)).max() == 0.0
    assert (abs(k - k.T)).max() == 0.0


def test_rejects_bad_coefficients():
    with pytest.raises(ValueError, match="positive"):
        MaterialModel(1.0, 4, [1, 1, 0, 1], 1.0, 0.0, 0.5, 0.5)
    with pytest.raises(ValueError, match="positive"):
        MaterialModel(1.0, 4, 1.0, [1, 0, 1, 1], 0.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        MaterialModel(1.0, 4, 1.0, 1.0, -0.1, 0.5, 0.5)
    with pytest.raises(ValueError, match="tau"):
        MaterialModel(1.0, 4, 1.0, 1.0, 0.0, 0.5, 1.5)
    with pytest.raises(ValueError, match="alpha"):
        MaterialModel(1.0, 4, 1.0, 1.0, 0.0, 0.0, 0.5)


def test_eigenvalues_constant_coefficients():
    model = unit_model(n=512, mu=0.5)
    basis = solve_eigenpairs(model, 5)
    m = np.arange(1, 6)
    exact = (m * np.pi) ** 2
    rel = np.abs(basis.eigenvalues - exact) / exact
    assert np.all(rel < 1e-3)


def test_eigenvalues_match_dense_full_spectrum():
    model = two_layer_model(n=20)
    basis = solve_eigenpairs(model, 19)
    mm, kk = assemble(model)
    full = scipy.linalg.eigvalsh(kk.toarray(), mm.toarray())
    assert np.allclose(basis.eigenvalues, full, rtol=1e-12)


def test_eigenvalues_decrease_under_refinement():
    vals = [solve_eigenpairs(unit_model(n=n, mu=0.5), 3).eigenvalues for n in (32, 64, 128)]
    exact = (np.arange(1, 4) * np.pi) ** 2
    assert np.all(vals[0] > vals[1]) and np.all(vals[1] > vals[2]) and np.all(vals[2] > exact)


@pytest.mark.parametrize("model", [two_layer_model(n=64), unit_model(n=50, mu=1.3, lam=0.4, rho=0.7)])
def test_orthonormality_and_stiffness_diagonal(model):
    basis = solve_eigenpairs(model, 12)
    phi = basis.vectors
    gram = phi.T @ (basis.mass_matrix @ phi)
    assert np.max(np.abs(gram - np.eye(12))) <= 1e-10
    a = phi.T @ (basis.stiffness_matrix @ phi)
    lam = basis.eigenvalues
    assert np.max(np.abs(a - np.diag(lam)) / lam[None, :]) <= 1e-8
    assert lam[0] > 0.0 and np.all(np.diff(lam) > 0.0)


def test_project_unit_vector():
    basis = solve_eigenpairs(two_layer_model(n=40), 6)
    c = basis.project(basis.vectors[:, 2])
    assert np.allclose(c, np.eye(6)[2], atol=1e-12)


def test_full_basis_reconstruction(rng):
    model = two_layer_model(n=30)
    basis = solve_eigenpairs(model, 29)
    v = rng.standard_normal(29)
    assert np.max(np.abs(basis.reconstruct(basis.project(v)) - v)) < 1e-10


def test_project_mesh_mismatch():
    basis = solve_eigenpairs(two_layer_model(n=16), 4)
    with pytest.raises(ValueError, match="interior nodes"):
        basis.project(np.zeros(10))


@given(seed=st.integers(0, 2**32 - 1))
def test_projection_contracts(seed):
    model = two_layer_model(n=24)
    basis = _basis_24()
    v = np.random.default_rng(seed).standard_normal(23)
    pv = basis.reconstruct(basis.project(v))
    norm_v = energy_norms(v, model)[0]
    norm_pv = energy_norms(pv, model)[0]
    assert norm_pv <= norm_v * (1 + 1e-12)


_CACHE = {}


def _basis_24():
    if "b" not in _CACHE:
        _CACHE["b"] = solve_eigenpairs(two_layer_model(n=24), 8)
    return _CACHE["b"]


def test_energy_norms_zero_and_sine():
    model = unit_model(n=16, mu=1.0)
    assert energy_norms(np.zeros(15), model) == (0.0, 0.0, 0.0)
    errs = []
    for n in (32, 64):
        m = unit_model(n=n, mu=1.0)
        v = np.sin(np.pi * m.interior_nodes())
        errs.append(abs(energy_norms(v, m)[0] - 0.5))
    assert errs[1] < errs[0] / 3.5


def test_energy_norm_lambda_ratio():
    model = unit_model(n=20, mu=0.8, lam=0.6)
    v = np.sin(np.pi * model.interior_nodes()) + 0.3 * np.sin(3 * np.pi * model.interior_nodes())
    _, s_mu, s_lam = energy_norms(v, model)
    assert s_lam == pytest.approx(0.6 / (2 * 0.8) * s_mu, rel=1e-13)


def test_parseval_matches_energy_norms(rng):
    model = two_layer_model(n=40)
    basis = solve_eigenpairs(model, 39)
    v = rng.standard_normal(39)
    c = basis.project(v)
    l2, s2mu, slam = energy_norms(v, model)
    assert np.sum(c**2) == pytest.approx(l2, rel=1e-11)
    assert np.sum(basis.eigenvalues * c**2) == pytest.approx(s2mu + slam, rel=1e-10)
