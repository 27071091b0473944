"""Probe the open question: does every mu-independent four-qubit state saturate the bound?

Samples random coefficient vectors that satisfy the mu-independence
conditions, maximizes extraction for each and reports the ones whose gap to
the second bound exceeds --tol. The sufficiency direction is not proven, so
any hit here is a counterexample worth keeping.
"""

import argparse
import json
import sys

import numpy as np

from feedback_bounds.fourqubit import FamilyCoefficients, build_family_state
from feedback_bounds.protocol import Hamiltonian
from feedback_bounds.search import SearchConfig, maximize_extraction, optimal_policy
from feedback_bounds.tensor import SIGMA_Z
from feedback_bounds.thermo import evaluate_bounds


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    args = p.parse_args(argv)

    h = Hamiltonian(SIGMA_Z)
    cfg = SearchConfig(grid_size=64, multistarts=8)
    rng = np.random.default_rng(args.seed)
    gaps, hits = [], []
    for k in range(args.samples):
        c = FamilyCoefficients.random_symmetric(rng)
        state = build_family_state(c)
        best = maximize_extraction(state, h, cfg)
        rep = evaluate_bounds(state, h, best.measurement, optimal_policy(state, best.measurement, h), cfg)
        if not rep.defined:
            continue
        gaps.append(rep.gap_second)
        if rep.gap_second > args.tol:
            hits.append({"sample": k, "coefficients": list(map(float, vars(c).values())), "gap": rep.gap_second})
    print(f"defined samples: {len(gaps)}  max gap: {max(gaps):.3e}  above tol: {len(hits)}")
    if hits:
        print(json.dumps(hits, indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
