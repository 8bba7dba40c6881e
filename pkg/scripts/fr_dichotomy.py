"""Monte Carlo run of the FR protocol under both ultimate-observer readings.

collapse: each trial draws an Alice/Bob outcome, conditionalizes, then
Wigner and Friend measure X, Y. unitary: X, Y are measured on the
entangled state directly. Prints the empirical ok,ok rate next to the
exact value for each.

    python scripts/fr_dichotomy.py --trials 200000 --seed 1
"""

import argparse
from collections import Counter

from qframes.measurement import born, conditionalize, sample
from qframes.scenarios import fr_contexts, fr_state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ctx = {c.id: c for c in fr_contexts()}
    ab, xy = ctx["AB"].joint, ctx["XY"].joint
    psi = fr_state()

    unitary = Counter(sample(xy, psi, args.trials, args.seed))
    print(f"unitary   P(ok,ok) exact {born(xy, psi)['ok', 'ok']:.6f}  "
          f"empirical {unitary['ok', 'ok'] / args.trials:.6f}")

    branches = Counter(sample(ab, psi, args.trials, args.seed))
    hits = 0
    for i, (branch, count) in enumerate(sorted(branches.items())):
        post = conditionalize(ab, branch, psi)
        draws = Counter(sample(xy, post, count, args.seed + 1 + i))
        hits += draws["ok", "ok"]
        print(f"  branch {','.join(branch)}: {count} trials, P(ok,ok | branch) = {born(xy, post)['ok', 'ok']:.6f}")
    print(f"collapse  P(ok,ok) exact 0.250000  empirical {hits / args.trials:.6f}")


if __name__ == "__main__":
    main()
