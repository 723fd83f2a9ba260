"""Randomised suites for the discrete convolution inequalities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .diagnostics import Verdict, lemma1_check, lemma2_check
from .memory import build_kernel_table

LEMMA1_ALPHAS = (0.3, 0.7)
LEMMA2_TRIPLES: Tuple[Tuple[float, float, float], ...] = (
    (1.0, 2.0, 2.0),
    (1.0, 1.0, 1.0),
    (2.0, 2.0, np.inf),
    (1.0, np.inf, np.inf),
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    verdicts: List[Verdict]

    @property
    def n_pass(self) -> int:
        return sum(v.passed for v in self.verdicts)

    @property
    def passed(self) -> bool:
        return self.n_pass == len(self.verdicts)


def lemma1_suite(
    seed: int, alpha: float, trials: int = 100, n_cells: int = 200, dt: float = 0.01, dim: int = 3
) -> SuiteResult:
    table = build_kernel_table(alpha, 1.0, dt, n_cells)
    rng = np.random.default_rng([seed, 1, int(round(alpha * 1000))])
    verdicts = []
    for _ in range(trials):
        v = rng.standard_normal((n_cells, dim)) * rng.uniform(0.1, 10.0)
        verdicts.append(lemma1_check(v, table, n_cells))
    return SuiteResult(f"lemma1 alpha={alpha}", verdicts)


def lemma2_suite(seed: int, triple: Sequence[float], trials: int = 100, n: int = 200, dt: float = 0.01) -> SuiteResult:
    p, q, r = triple
    rng = np.random.default_rng([seed, 2])
    verdicts = []
    for _ in range(trials):
        f = rng.standard_normal(n) * rng.uniform(0.1, 10.0)
        g = rng.standard_normal(n)
        verdicts.append(lemma2_check(f, g, p, q, r, dt))
    return SuiteResult(f"lemma2 (p,q,r)=({p:g},{q:g},{r:g})", verdicts)


def negative_controls() -> List[Tuple[str, bool]]:
    """Each control must be rejected by validation; returns ``(name, rejected)``."""
    out = []
    table = build_kernel_table(0.5, 1.0, 0.01, 50)
    try:
        lemma1_check(np.ones(50), -table.weights)
        out.append(("lemma1 sign-flipped kernel", False))
    except ValueError:
        out.append(("lemma1 sign-flipped kernel", True))
    try:
        lemma2_check(np.ones(10), np.ones(10), 2.0, 2.0, 2.0)
        out.append(("lemma2 invalid exponent triple", False))
    except ValueError:
        out.append(("lemma2 invalid exponent triple", True))
    return out


def run_all(seed: int, trials: int = 100) -> Tuple[List[SuiteResult], List[Tuple[str, bool]]]:
    suites = [lemma1_suite(seed, a, trials) for a in LEMMA1_ALPHAS]
    suites += [lemma2_suite(seed, t, trials) for t in LEMMA2_TRIPLES]
    return suites, negative_controls()


__all__ = ["LEMMA1_ALPHAS", "LEMMA2_TRIPLES", "SuiteResult", "lemma1_suite", "lemma2_suite", "negative_controls", "run_all"]
