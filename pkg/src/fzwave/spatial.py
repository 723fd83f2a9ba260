"""Weighted P1 finite elements for the 1D elasticity operator.

The bilinear form is reduced to one space dimension, where the strain and
its trace coincide with ``u'``:

    a(w, v) = int (2 mu + lam) w' v' dx,      (w, v)_rho = int rho w v dx,

with homogeneous Dirichlet conditions at both ends.  Coefficients are
constant per element, so every element integral below is exact.

Nodal fields live on the ``n_elements - 1`` interior nodes; the boundary
values are implicitly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp


class EigenSolveError(RuntimeError):
    """The generalised eigensolver failed."""


@dataclass(frozen=True)
class MaterialModel:
    """Element-wise coefficients on a uniform mesh of ``(0, domain_length)``."""

    domain_length: float
    n_elements: int
    rho: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    alpha: float
    tau: float

    def __post_init__(self) -> None:
        if not self.domain_length > 0.0:
            raise ValueError("domain_length must be positive")
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ValueError("n_elements must be an integer >= 2")
        for name in ("rho", "mu", "lam"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (self.n_elements,))
            arr = np.array(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if np.any(self.rho <= 0.0):
            raise ValueError("rho must be bounded below by a positive constant (rho > 0 on every element)")
        if np.any(self.mu <= 0.0):
            raise ValueError("mu must be bounded below by a positive constant (mu > 0 on every element)")
        if np.any(self.lam < 0.0):
            raise ValueError("lam must be nonnegative on every element")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (0.0 < self.tau <= 1.0):
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")

    @property
    def h(self) -> float:
        return self.domain_length / self.n_elements

    @property
    def n_interior(self) -> int:
        return self.n_elements - 1

    @property
    def tau_alpha(self) -> float:
        return self.tau**self.alpha

    @property
    def stiffness_coefficient(self) -> np.ndarray:
        """Per-element ``2 mu + lam``."""
        return 2.0 * self.mu + self.lam

    def nodes(self) -> np.ndarray:
        """All mesh nodes, boundary included."""
        return np.linspace(0.0, self.domain_length, self.n_elements + 1)

    def interior_nodes(self) -> np.ndarray:
        return self.nodes()[1:-1]

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_elements) + 0.5) * self.h


def check_nodal(field_values, model: MaterialModel) -> np.ndarray:
    v = np.asarray(field_values, dtype=float)
    if v.shape[0] != model.n_interior:
        raise ValueError(
            f"nodal field has {v.shape[0]} values, mesh has {model.n_interior} interior nodes"
        )
    return v


def pad_boundary(v: np.ndarray) -> np.ndarray:
    """Append the zero Dirichlet values at both ends (along axis 0)."""
    pad = [(1, 1)] + [(0, 0)] * (v.ndim - 1)
    return np.pad(v, pad)


def element_gradient(v: np.ndarray, model: MaterialModel) -> np.ndarray:
    """Per-element derivative of a P1 field given at interior nodes."""
    return np.diff(pad_boundary(check_nodal(v, model)), axis=0) / model.h


def full_mass(weight: np.ndarray, h: float) -> sp.csr_matrix:
    """Weighted P1 mass matrix over all ``n + 1`` nodes."""
    n = weight.size
    diag = np.zeros(n + 1)
    diag[:-1] += weight * h / 3.0
    diag[1:] += weight * h / 3.0
    off = weight * h / 6.0
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def full_stiffness(coef: np.ndarray, h: float) -> sp.csr_matrix:
    n = coef.size
    diag = np.zeros(n + 1)
    diag[:-1] += coef / h
    diag[1:] += coef / h
    off = -coef / h
    return sp.diags([off, diag, off], [-1, 0, 1], format="csr")


def _interior(mat: sp.csr_matrix) -> sp.csr_matrix:
    return mat[1:-1, 1:-1].tocsr()


def assemble(model: MaterialModel) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Mass (rho-weighted) and stiffness (``2 mu + lam``) on interior nodes."""
    mass = _interior(full_mass(model.rho, model.h))
    stiffness = _interior(full_stiffness(model.stiffness_coefficient, model.h))
    return mass, stiffness


@dataclass(frozen=True)
class ModalBasis:
    """First ``n_modes`` M-orthonormal eigenpairs of ``K phi = lambda M phi``.

    ``vectors[:, m]`` holds mode ``m`` at the interior nodes.
    """

    model: MaterialModel
    eigenvalues: np.ndarray
    vectors: np.ndarray
    mass_matrix: sp.csr_matrix
    stiffness_matrix: sp.csr_matrix
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    def project(self, field_values) -> np.ndarray:
        """Coefficients ``c_m = (rho v, phi_m)``."""
        v = check_nodal(field_values, self.model)
        return self.vectors.T @ (self.mass_matrix @ v)

    def reconstruct(self, coeffs) -> np.ndarray:
        return self.vectors @ np.asarray(coeffs, dtype=float).T

    def mode_gradients(self) -> np.ndarray:
        """Per-element derivative of every mode, shape ``(n_elements, n_modes)``."""
        if "grad" not in self._cache:
            self._cache["grad"] = element_gradient(self.vectors, self.model)
        return self._cache["grad"]

    def strain_forms(self) -> Tuple[np.ndarray, np.ndarray]:
        """Modal Gram matrices of ``int mu w' v'`` and ``int lam w' v'``."""
        if "forms" not in self._cache:
            grad = self.mode_gradients()
            h = self.model.h
            mu_form = grad.T @ (self.model.mu[:, None] * grad) * h
            lam_form = grad.T @ (self.model.lam[:, None] * grad) * h
            self._cache["forms"] = (mu_form, lam_form)
        return self._cache["forms"]


def solve_eigenpairs(model: MaterialModel, n_modes: int) -> ModalBasis:
    """Dense generalised symmetric eigensolve for the lowest ``n_modes`` pairs.

    Modes are scaled to unit ``L^2_rho`` norm and signed so that their first
    interior value is positive.
    """
    if not (1 <= n_modes <= model.n_interior):
        raise ValueError(f"n_modes must lie in [1, {model.n_interior}], got {n_modes}")
    mass, stiffness = assemble(model)
    try:
        vals, vecs = scipy.linalg.eigh(
            stiffness.toarray(), mass.toarray(), subset_by_index=[0, n_modes - 1]
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolveError(
            f"generalised eigensolve failed for n_interior={model.n_interior}, "
            f"n_modes={n_modes}: {exc}"
        ) from exc
    # renormalise against the sparse mass matrix so Gram errors stay at roundoff
    norms = np.sqrt(np.einsum("im,im->m", vecs, mass @ vecs))
    vecs = vecs / norms
    signs = np.sign(vecs[0])
    signs[signs == 0.0] = 1.0
    vecs = vecs * signs
    if not np.all(vals > 0.0):
        raise EigenSolveError(f"non-positive eigenvalue {vals.min():.3e}")
    return ModalBasis(model, vals, vecs, mass, stiffness)


def energy_norms(field_values, model: MaterialModel) -> Tuple[float, float, float]:
    """``(int rho v^2, int 2 mu v'^2, int lam v'^2)`` for a P1 field."""
    v = check_nodal(field_values, model)
    mass = _interior(full_mass(model.rho, model.h))
    grad = element_gradient(v, model)
    h = model.h
    return (
        float(v @ (mass @ v)),
        float(np.sum(2.0 * model.mu * grad**2) * h),
        float(np.sum(model.lam * grad**2) * h),
    )
