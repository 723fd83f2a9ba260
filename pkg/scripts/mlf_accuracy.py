"""Accuracy of the Mittag-Leffler evaluator against the extended-precision oracle.

Usage: python scripts/mlf_accuracy.py

Prints the maximum absolute error per (alpha, beta) on [-50, 0] and the
largest jump across the two regime boundaries.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import ml_oracle  # noqa: E402

from fzwave import mlf  # noqa: E402


def main() -> int:
    x = np.linspace(-50.0, 0.0, 400)
    print(f"{'alpha':>6} {'beta':>6} {'max error':>10} {'jump |x|=1':>11} {'jump asym':>10}")
    for alpha in (0.2, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1.0):
        for beta in sorted({alpha, 1.0, 2.0}):
            ref = np.array([ml_oracle(v, alpha, beta) for v in x])
            err = float(np.max(np.abs(mlf.mittag_leffler(x, alpha, beta) - ref)))
            if alpha < 1.0:
                b1 = np.array([-mlf.SERIES_RADIUS])
                b2 = np.array([-(mlf.ASYMPTOTIC_SCALE**alpha)])
                j1 = abs(mlf._series(b1, alpha, beta)[0] - mlf._middle(b1, alpha, beta)[0])
                j2 = abs(mlf._asymptotic(b2, alpha, beta)[0] - mlf._middle(b2, alpha, beta)[0])
                jumps = f"{j1:11.1e} {j2:10.1e}"
            else:
                jumps = f"{'-':>11} {'-':>10}"
            print(f"{alpha:6.3f} {beta:6.3f} {err:10.1e} {jumps}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
