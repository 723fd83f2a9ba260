"""Energy-inequality matrix over (alpha, tau) for the generic fractional configuration.

Usage: python scripts/run_matrix.py [CONFIG]
"""

from __future__ import annotations

import sys
import time
from dataclasses import replace
from pathlib import Path

from fzwave.config import load_config
from fzwave.diagnostics import check_dissipation_sign, check_energy_inequality, energy_report
from fzwave.pipeline import prepare, simulate

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "configs" / "fractional.toml"
    base = load_config(path)
    print(f"{'alpha':>6} {'tau':>6} {'max lhs/bound':>14} {'dissipation':>12} {'seconds':>8}")
    ok = True
    for alpha in (0.3, 0.5, 0.7, 0.9):
        for tau in (0.25, 0.5, 1.0):
            start = time.perf_counter()
            setup = prepare(replace(base, model=replace(base.model, alpha=alpha, tau=tau)))
            rep = energy_report(simulate(setup), setup.data, setup.load)
            ineq, sign = check_energy_inequality(rep), check_dissipation_sign(rep)
            ok &= ineq.passed and sign.passed
            print(f"{alpha:6.2f} {tau:6.2f} {ineq.margin:14.6f} {sign.label:>12} {time.perf_counter() - start:8.2f}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
