"""Command-line interface.

::

    fzwave run CONFIG [--out DIR]
    fzwave study CONFIG --levels N [--refine-mesh] [--out DIR]
    fzwave table-mlf --alpha A --gamma G --dt DT --n N
    fzwave check --seed N [--trials T]

The ``FZWAVE_THREADS`` environment variable sets the number of worker
threads used for per-mode integration.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, load_config
from .evolution import NumericalError
from .mlf import DomainError, tabulate


def _cmd_run(args) -> int:
    from .pipeline import run

    cfg = load_config(args.config)
    result = run(cfg, Path(args.out) if args.out else None)
    for name, entry in result.report["checks"].items():
        print(f"{name}: {entry['verdict']} ({entry['detail']})")
    print(f"wrote {', '.join(str(p) for p in result.files.values())}")
    return result.exit_status


def _cmd_study(args) -> int:
    from .pipeline import STUDY_QUANTITIES, convergence_study

    cfg = load_config(args.config)
    res = convergence_study(cfg, args.levels, args.refine_mesh, Path(args.out) if args.out else None)
    for r in res["rows"]:
        orders = ", ".join(
            f"{q}={r['order_' + q]:.3f}" for q in STUDY_QUANTITIES if r["order_" + q] is not None
        )
        print(f"level {r['level']} dt={r['dt']:g} n={r['n_elements']} {orders}")
    print(f"wrote {res['path']}")
    return 0


def _cmd_table(args) -> int:
    rows = tabulate(args.alpha, args.gamma, args.dt, args.n)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "e", "e_dot"])
    for t, e, de in rows:
        w.writerow([f"{t:.17g}", f"{e:.17g}", f"{de:.17g}"])
    return 0


def _cmd_check(args) -> int:
    from .suites import run_all

    suites, controls = run_all(args.seed, args.trials)
    ok = True
    for s in suites:
        print(f"{s.name}: {s.n_pass}/{len(s.verdicts)} pass")
        ok &= s.passed
    for name, rejected in controls:
        print(f"{name}: {'rejected' if rejected else 'NOT rejected'}")
        ok &= rejected
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fzwave", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one simulation and its checks")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output.directory)")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("study", help="temporal self-convergence study")
    s.add_argument("config")
    s.add_argument("--levels", type=int, required=True)
    s.add_argument("--refine-mesh", action="store_true", help="also double n_elements per level")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_study)

    t = sub.add_parser("table-mlf", help="tabulate the relaxation kernel")
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--gamma", type=float, default=1.0)
    t.add_argument("--dt", type=float, required=True)
    t.add_argument("--n", type=int, required=True)
    t.set_defaults(func=_cmd_table)

    c = sub.add_parser("check", help="randomised convolution-inequality suites")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trials", type=int, default=100)
    c.set_defaults(func=_cmd_check)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
