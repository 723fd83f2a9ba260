"""Temporal self-convergence of the discrete energy and displacement norm.

Usage: python scripts/convergence.py [CONFIG] [LEVELS]

Halves dt from the config value and prints observed orders
log2(|Q_l - Q_{l+1}| / |Q_{l+1} - Q_{l+2}|).
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from fzwave.config import load_config
from fzwave.diagnostics import energy_report
from fzwave.pipeline import observed_orders, prepare, simulate

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "configs" / "fractional.toml"
    levels = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    base = load_config(path)
    dt0 = 4e-3 if path.name == "fractional.toml" else base.scheme.dt
    t_final = 1.0 if path.name == "fractional.toml" else base.scheme.t_final
    energy, unorm = [], []
    for level in range(levels):
        dt = dt0 / 2**level
        setup = prepare(replace(base, scheme=replace(base.scheme, dt=dt, t_final=t_final)))
        traj = simulate(setup)
        energy.append(float(energy_report(traj, setup.data, setup.load).total[-1]))
        unorm.append(float(np.sqrt(np.sum(traj.beta[-1] ** 2))))
    for level, (e, u, oe, ou) in enumerate(zip(energy, unorm, observed_orders(energy), observed_orders(unorm))):
        fmt = lambda o: "-" if o is None else f"{o:.3f}"  # noqa: E731
        print(f"dt={dt0 / 2**level:.2e}  E={e:.12f}  order {fmt(oe):>6}  |beta|={u:.12f}  order {fmt(ou):>6}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
