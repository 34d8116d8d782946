"""Left/right |Psi|^2 asymmetry of the 13-bilayer cavity versus time and initial mode.

    python scripts/asymmetry_scan.py [--n-modes 12] [--tau-max 10]
"""

import argparse
import warnings

import numpy as np

from maxdaemon import emcavity as em


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-modes", type=int, default=12)
    ap.add_argument("--tau-max", type=float, default=10.0)
    ap.add_argument("--tau-count", type=int, default=41)
    args = ap.parse_args()
    stack = em.graded_stack()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", em.BranchWarning)
        modes = em.solve_modes(stack, args.n_modes)
    print(f"{modes.omegas.size} modes, {modes.failed.size} failed starts")
    taus = np.linspace(0, args.tau_max, args.tau_count)
    x = np.linspace(0, stack.L, 2401)
    cols = range(min(4, args.n_modes))
    print("tau    " + "  ".join(f"b=e{m:<5d}" for m in cols))
    table = []
    for m in cols:
        b = np.zeros(args.n_modes)
        b[m] = 1
        table.append(em.side_asymmetry(em.reconstruct_field(modes, b, taus, x, stack.L), stack.L))
    for i, t in enumerate(taus):
        print(f"{t:5.2f}  " + "  ".join(f"{row[i]:+.4f}" for row in table))


if __name__ == "__main__":
    main()
