"""Regenerate the eta sweep table (bound decomposition vs maximal extraction).

    python3 scripts/reproduce_eta_sweep.py --out sweep.csv [--plot sweep.png]

Writes the CSV, prints the worst gap and how far the numeric rows sit from
the closed-form bound, and optionally draws the two curves with matplotlib.
"""

import argparse
import sys

import numpy as np

from feedback_bounds.cli import main as cli_main
from feedback_bounds.files import loads_csv
from feedback_bounds.fourqubit import analytic_bound


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--steps", type=int, default=199)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", default=None, help="optional PNG path (needs matplotlib)")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    code = cli_main(["sweep", "--steps", str(args.steps), "--workers", str(args.workers), "--out", args.out])
    if code:
        return code
    with open(args.out) as fh:
        _, rows = loads_csv(fh.read())
    ok = [r for r in rows if r["status"] == "ok"]
    eta = np.array([r["eta"] for r in ok])
    bound = np.array([r["bound_second"] for r in ok])
    gap = np.array([r["gap"] for r in ok])
    closed = np.array([sum(analytic_bound(x)[1:]) for x in eta])
    print(f"rows: {len(rows)}  defined: {len(ok)}")
    print(f"gap range: [{gap.min():.3e}, {gap.max():.6f}] at eta = {eta[gap.argmax()]:+.2f}")
    print(f"max |numeric bound - closed form|: {np.abs(bound - closed).max():.2e}")
    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, (top, inset) = plt.subplots(2, 1, figsize=(5, 6), sharex=True)
        top.plot(eta, [r["D_term"] for r in ok], label="D / beta_eff")
        top.plot(eta, [r["E_SA_term"] for r in ok], label="E_SA / beta_eff")
        top.plot(eta, bound, label="bound")
        top.plot(eta, [r["max_E_ext"] for r in ok], "--", label="max E_ext")
        top.legend()
        inset.plot(eta, gap)
        inset.set_xlabel("eta")
        inset.set_ylabel("gap")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
    return 0


if __name__ == "__main__":
    sys.exit(main())
