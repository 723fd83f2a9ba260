"""Product integration against the completely monotone kernel ``-e_dot``.

For a history that is constant on each cell ``(t_k, t_{k+1})`` the memory
integral is evaluated exactly:

    (-e_dot * v)(t_n) = sum_{k<n} w_{n-1-k} v_{k+1/2},
    w_j = e(t_j) - e(t_{j+1}) = int_{t_j}^{t_{j+1}} -e_dot.

The weights are differences of kernel values, never quadratures of the
singular integrand, and they telescope to ``1 - e(t_n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlf import KernelParams, e_kernel, e_kernel_integral


@dataclass(frozen=True)
class KernelTable:
    """Kernel samples, cell weights and exact kernel moments on ``t_k = k dt``.

    Attributes
    ----------
    e_samples : (n_steps + 1,) array
        ``e(t_k)``; ``e_samples[0] == 1``.
    weights : (n_steps,) array
        ``w_k = e(t_k) - e(t_{k+1})``.
    e_integrals : (n_steps + 1,) array
        ``int_0^{t_k} e``, used when the kernel multiplies a cell-constant
        history without being differentiated.
    """

    alpha: float
    gamma: float
    dt: float
    n_steps: int
    e_samples: np.ndarray
    weights: np.ndarray
    e_integrals: np.ndarray

    @property
    def params(self) -> KernelParams:
        return KernelParams(self.alpha, self.gamma)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def e_moments(self) -> np.ndarray:
        """``int_{t_k}^{t_{k+1}} e`` for each cell."""
        return np.diff(self.e_integrals)

    def matches(self, t_grid: np.ndarray) -> bool:
        t_grid = np.asarray(t_grid, dtype=float)
        return t_grid.size == self.n_steps + 1 and bool(
            np.allclose(t_grid, self.times, rtol=0.0, atol=1e-9 * self.dt)
        )


def build_kernel_table(alpha: float, gamma: float, dt: float, n_steps: int) -> KernelTable:
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError("n_steps must be an integer >= 1")
    params = KernelParams(alpha, gamma)
    t = dt * np.arange(n_steps + 1)
    e = np.asarray(e_kernel(params, t), dtype=float)
    e[0] = 1.0
    weights = e[:-1] - e[1:]
    integrals = np.asarray(e_kernel_integral(params, t), dtype=float)
    for arr in (e, weights, integrals):
        arr.setflags(write=False)
    return KernelTable(float(alpha), float(gamma), float(dt), int(n_steps), e, weights, integrals)


def convolve(history, table: KernelTable, n: int) -> float:
    """``sum_{k<n} w_{n-1-k} v_{k+1/2}`` for cell values ``history[k]``."""
    v = np.asarray(history, dtype=float)
    if not (0 <= n <= table.n_steps):
        raise IndexError(f"step index {n} outside [0, {table.n_steps}]")
    if v.shape[0] < n:
        raise IndexError(f"history holds {v.shape[0]} cells, step {n} needs {n}")
    if n == 0:
        return 0.0
    return float(np.dot(table.weights[n - 1 :: -1], v[:n]))


def causal_sum(weights: np.ndarray, cells) -> np.ndarray:
    """``out[n] = sum_{k<n} weights[n-1-k] cells[k]`` for ``n = 0..len(cells)``.

    ``cells`` may carry trailing axes; the sum runs over axis 0 column by
    column, so each column is processed independently of the others.
    """
    v = np.asarray(cells, dtype=float)
    n = v.shape[0]
    if weights.shape[0] < n:
        raise IndexError("history longer than the weight sequence")
    out = np.zeros((n + 1,) + v.shape[1:])
    if n == 0 or out.size == 0:
        return out
    flat = v.reshape(n, -1)
    res = out.reshape(n + 1, -1)
    w = np.ascontiguousarray(weights[:n])
    for j in range(flat.shape[1]):
        res[1:, j] = np.convolve(w, flat[:, j])[:n]
    return out


def running_convolution(history, table: KernelTable) -> np.ndarray:
    """All values ``convolve(history, table, n)`` for ``n = 0..len(history)``."""
    return causal_sum(table.weights, history)


__all__ = ["KernelTable", "build_kernel_table", "causal_sum", "convolve", "running_convolution"]
