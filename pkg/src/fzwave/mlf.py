"""Mittag-Leffler function on the closed negative real axis.

Evaluates ``E_{a,b}(x)`` for ``0 < a <= 1``, ``b > 0`` and ``x <= 0`` and the
relaxation kernel ``e_a(t, g) = E_{a,1}(-g t^a)`` built on it.

Three regimes are used, chosen per argument:

* ``|x| <= SERIES_RADIUS``: truncated power series (Horner, double precision;
  the terms are bounded by ``1/Gamma(a k + b)`` so nothing cancels).
* ``|x|**(1/a) >= ASYMPTOTIC_SCALE``: the algebraic asymptotic expansion
  ``-sum_k x^{-k} / Gamma(b - a k)`` summed up to its smallest term; the
  remainder is of order ``exp(-|x|**(1/a))`` and below double precision.
* otherwise: the Bromwich integral collapsed onto the branch cut.  For
  ``0 < a < 1`` the integrand ``s^{a-b}/(s^a - x)`` has no poles on the
  principal sheet, leaving a real integral over ``(0, inf)`` that is
  evaluated with a double-exponential (exp-sinh) trapezoidal rule.  Its
  integrand develops a peak of width ``~(1 - a)`` as ``a -> 1``, so for
  ``1 - a < NEAR_ONE`` this regime uses the power series in extended
  precision instead.

For ``a = 1`` the function is elementary for integer ``b`` and is otherwise
expressed through Kummer's function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln, rgamma

SERIES_RADIUS = 1.0
ASYMPTOTIC_SCALE = 60.0

# exp-sinh window: y in [1e-40, 745**a] covers the integrand to double precision
_T_LOW = -math.asinh((2.0 / math.pi) * 40.0 * math.log(10.0))
_MAX_BLOCK = 1 << 22
NEAR_ONE = 5e-3


class DomainError(ValueError):
    """Argument or parameter outside the supported domain."""


@dataclass(frozen=True)
class MlfParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta > 0.0:
            raise DomainError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.gamma > 0.0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")


def _series(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    # |x| <= 1: stop once 1/Gamma(alpha k + beta) < 1e-18
    kmax = 8
    while gammaln(alpha * kmax + beta) < 18.0 * math.log(10.0):
        kmax += 8
    coeffs = rgamma(alpha * np.arange(kmax + 1) + beta)
    out = np.zeros_like(x)
    for c in coeffs[::-1]:
        out = out * x + c
    return out


def _asymptotic(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    kmax = max(4, min(int(160.0 / alpha), 4000))
    k = np.arange(1, kmax + 1, dtype=float)
    arg = beta - alpha * k
    logx = np.log(-x)[:, None]
    # envelope |x|^{-k} Gamma(alpha k - beta + 1) bounds |x^{-k}/Gamma(beta - alpha k)|
    shifted = alpha * k - beta + 1.0
    envelope = np.where(shifted > 0.0, -k * logx + gammaln(np.maximum(shifted, 1e-300)), np.inf)
    stop = np.argmin(envelope, axis=1)
    keep = k[None, :] <= (stop[:, None] + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)  # sign of x^{-k} for x < 0
    terms = np.where(keep, sign * np.exp(-k * logx) * rgamma(arg), 0.0)
    return -terms.sum(axis=1)


def _quadrature_step(alpha: float) -> float:
    return min(1.0 / 40.0, (1.0 - alpha) / 6.0)


def _hankel(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Collapsed Bromwich integral, valid for beta < 1 + alpha and alpha < 1."""
    h = _quadrature_step(alpha)
    t_high = math.asinh((2.0 / math.pi) * alpha * math.log(745.0)) + h
    t = np.arange(_T_LOW, t_high, h)
    y = np.exp(0.5 * math.pi * np.sinh(t))
    weight = y * (0.5 * math.pi * np.cosh(t)) * h
    base = np.exp(-(y ** (1.0 / alpha))) * y ** ((1.0 - beta) / alpha) * weight
    sin_b = math.sin(math.pi * beta)
    sin_ba = math.sin(math.pi * (beta - alpha))
    cos_a = math.cos(math.pi * alpha)
    live = base > 0.0
    y, base = y[live], base[live]

    out = np.empty_like(x)
    block = max(1, _MAX_BLOCK // max(y.size, 1))
    for start in range(0, x.size, block):
        lam = -x[start : start + block, None]
        num = y * sin_b + lam * sin_ba
        den = y * y + 2.0 * lam * y * cos_a + lam * lam
        out[start : start + block] = (base * num / den).sum(axis=1)
    return out / (alpha * math.pi)


def _series_mp(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Power series in extended precision; terms reach ``exp(|x|^(1/a))``."""
    import mpmath

    size = float(np.max((-x) ** (1.0 / alpha)))
    dps = int(size / 2.3) + 30
    with mpmath.workdps(dps):
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        lam = float(np.max(-x))
        kmax = 16
        while kmax * math.log(max(lam, 1.0)) - gammaln(alpha * kmax + beta) > -(dps + 5) * math.log(10.0) or kmax < size:
            kmax += 16
        coeffs = [mpmath.rgamma(a * k + b) for k in range(kmax + 1)]
        out = np.empty_like(x)
        for i, v in enumerate(x):
            z = mpmath.mpf(float(v))
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * z + c
            out[i] = float(acc)
    return out


def _middle(x: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    if 1.0 - alpha < NEAR_ONE:
        return _series_mp(x, alpha, beta)
    # lower beta below 1 with E_{a,b}(x) = (E_{a,b-a}(x) - 1/Gamma(b-a)) / x
    if beta <= 1.0:
        return _hankel(x, alpha, beta)
    return (_middle(x, alpha, beta - alpha) - rgamma(beta - alpha)) / x


def _alpha_one(x: np.ndarray, beta: float) -> np.ndarray:
    small = np.abs(x) <= SERIES_RADIUS
    out = np.empty_like(x)
    out[small] = _series(x[small], 1.0, beta)
    xl = x[~small]
    if beta == round(beta):
        m = int(round(beta))
        # E_{1,m}(x) = (exp(x) - sum_{k<m-1} x^k/k!) / x^{m-1}
        partial = np.zeros_like(xl)
        for k in range(m - 1):
            partial += xl**k / math.factorial(k)
        out[~small] = (np.exp(xl) - partial) / xl ** (m - 1)
    else:
        import mpmath

        out[~small] = [
            float(mpmath.hyp1f1(1, beta, float(v)) * mpmath.rgamma(beta)) for v in xl
        ]
    return out


def mittag_leffler(x, alpha: float, beta: float = 1.0) -> np.ndarray:
    """Vectorised ``E_{alpha,beta}(x)`` for real ``x <= 0``.

    Raises
    ------
    DomainError
        If any ``x > 0`` or the parameters are outside ``0 < alpha <= 1``,
        ``beta > 0``.
    """
    MlfParams(alpha, beta)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if np.any(x > 0.0) or np.any(np.isnan(x)):
        raise DomainError("Mittag-Leffler evaluation is restricted to x <= 0")
    if alpha == 1.0:
        return _alpha_one(x, beta).reshape(shape)

    out = np.empty_like(x)
    series = np.abs(x) <= SERIES_RADIUS
    asym = ~series & ((-x) ** (1.0 / alpha) >= ASYMPTOTIC_SCALE)
    middle = ~series & ~asym
    if series.any():
        out[series] = _series(x[series], alpha, beta)
    if asym.any():
        out[asym] = _asymptotic(x[asym], alpha, beta)
    if middle.any():
        out[middle] = _middle(x[middle], alpha, beta)
    return out.reshape(shape)


def ml_eval(params: MlfParams, x: float) -> float:
    """Scalar ``E_{alpha,beta}(x)`` for ``x <= 0``."""
    return float(mittag_leffler(np.array([x]), params.alpha, params.beta)[0])


def e_kernel(params: KernelParams, t):
    """Relaxation kernel ``e_alpha(t, gamma) = E_{alpha,1}(-gamma t^alpha)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("kernel is defined for t >= 0")
    out = mittag_leffler(-params.gamma * t**params.alpha, params.alpha, 1.0)
    return float(out) if out.ndim == 0 else out


def e_kernel_derivative(params: KernelParams, t):
    """Time derivative ``-gamma t^{alpha-1} E_{alpha,alpha}(-gamma t^alpha)``.

    Singular at ``t = 0`` for ``alpha < 1``, where a :class:`DomainError` is
    raised.
    """
    t = np.asarray(t, dtype=float)
    a, g = params.alpha, params.gamma
    if np.any(t < 0.0) or (a < 1.0 and np.any(t == 0.0)):
        raise DomainError("kernel derivative requires t > 0 for alpha < 1")
    out = -g * t ** (a - 1.0) * mittag_leffler(-g * t**a, a, a)
    return float(out) if out.ndim == 0 else out


def e_kernel_integral(params: KernelParams, t):
    """Running integral ``int_0^t e_alpha(s, gamma) ds = t E_{alpha,2}(-gamma t^alpha)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("kernel is defined for t >= 0")
    a, g = params.alpha, params.gamma
    out = t * mittag_leffler(-g * t**a, a, 2.0)
    return float(out) if out.ndim == 0 else out


def laplace_transform_exact(params: KernelParams, p: float) -> float:
    a = params.alpha
    return p ** (a - 1.0) / (p**a + params.gamma)


def laplace_consistency(params: KernelParams, p: float, t_max: float, tol: float) -> float:
    """Residual of the truncated Laplace transform of the kernel.

    Returns ``|int_0^{t_max} e(t) exp(-p t) dt - p^{a-1}/(p^a + gamma)|``.
    ``tol`` only validates that the neglected tail ``exp(-p t_max)/p`` (using
    ``0 <= e <= 1``) is below it.
    """
    if not p > params.gamma ** (1.0 / params.alpha):
        raise DomainError("p must exceed gamma**(1/alpha)")
    if math.exp(-p * t_max) / p > tol:
        raise DomainError("t_max too small: truncated tail exceeds tol")

    def f(t: float) -> float:
        return e_kernel(params, t) * math.exp(-p * t)

    # split near the origin where the kernel behaves like 1 - c t^alpha
    breaks = [0.0, min(1e-6, t_max), min(1.0, t_max), min(10.0 / p, t_max), t_max]
    breaks = sorted(set(breaks))
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)
        total += val
    return abs(total - laplace_transform_exact(params, p))


def tabulate(alpha: float, gamma: float, dt: float, n: int) -> np.ndarray:
    """Rows ``(t_k, e(t_k), e_dot(t_k))`` for ``k = 0..n``; ``e_dot(0)`` is ``-inf`` when singular."""
    params = KernelParams(alpha, gamma)
    t = dt * np.arange(n + 1)
    e = e_kernel(params, t)
    de = np.empty_like(t)
    de[1:] = e_kernel_derivative(params, t[1:])
    de[0] = -gamma if alpha == 1.0 else -math.inf
    return np.column_stack([t, e, de])


__all__ = [
    "ASYMPTOTIC_SCALE",
    "SERIES_RADIUS",
    "DomainError",
    "KernelParams",
    "MlfParams",
    "e_kernel",
    "e_kernel_derivative",
    "e_kernel_integral",
    "laplace_consistency",
    "mittag_leffler",
    "ml_eval",
    "tabulate",
]
