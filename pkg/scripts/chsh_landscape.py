"""Compare maximize_chsh against a brute-force angle grid for the built-in states.

    python scripts/chsh_landscape.py --step 1 --restarts 20 --seed 1
"""

import argparse
import time

import numpy as np

from qframes.scenarios import CHSH_STATES, correlation_matrix, maximize_chsh


def grid_max(corr, step_deg):
    ang = np.deg2rad(np.arange(0, 360, step_deg))
    n = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    proj = n @ corr
    best = -np.inf
    for row in proj:
        s = ((row + proj) @ n.T).max(axis=1) + ((row - proj) @ n.T).max(axis=1)
        best = max(best, s.max())
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--step", type=float, default=1.0, help="grid resolution in degrees")
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print(f"{'state':<10} {'grid':>14} {'optimizer':>14} {'sqrt-sv bound':>14} {'secs':>6}")
    for name, make in CHSH_STATES.items():
        state = make()
        corr = correlation_matrix(state)
        sv = np.linalg.svd(corr, compute_uv=False)
        t0 = time.perf_counter()
        _, best = maximize_chsh(state, args.restarts, args.seed)
        dt = time.perf_counter() - t0
        print(f"{name:<10} {grid_max(corr, args.step):14.10f} {best:14.10f} "
              f"{2 * np.sqrt((sv ** 2).sum()):14.10f} {dt:6.2f}")


if __name__ == "__main__":
    main()
