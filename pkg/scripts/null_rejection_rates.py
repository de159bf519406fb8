"""Empirical rejection rate and KS distance of each test under its null.

    python3 scripts/null_rejection_rates.py --reps 100000 --seed 7
"""

import argparse
import time

import numpy as np

from qlanova import Layout, State, TestKind
from qlanova.oracle import SimPlan, simulate_statistic


def configurations(reps, seed, alpha):
    two_way = Layout.two_way(2, 3, 4)
    rows, cols = np.array([-1.0, 2.0]), np.array([0.5, -3.0, 1.0])
    return [
        ("t n=5", SimPlan(State([0.0], 1.0), Layout.single(5), reps, seed, TestKind.MEAN_EQUALS_MU0, alpha, mu0=0.0)),
        ("oneway 4,5,6", SimPlan(State([0.0] * 3, 1.0), Layout.one_way([4, 5, 6]), reps, seed + 1, TestKind.ONE_WAY_EQUAL_MEANS, alpha)),
        ("twoway-a 2x3x4", SimPlan(State(np.tile(cols, 2), 1.0), two_way, reps, seed + 2, TestKind.TWO_WAY_MAIN_A, alpha)),
        ("twoway-b 2x3x4", SimPlan(State(np.repeat(rows, 3), 1.0), two_way, reps, seed + 3, TestKind.TWO_WAY_MAIN_B, alpha)),
        (
            "interaction 2x3x4",
            SimPlan(State((rows[:, None] + cols).ravel(), 1.0), two_way, reps, seed + 4, TestKind.TWO_WAY_INTERACTION, alpha),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    print(f"{'config':<20}{'law':<10}{'tail':>8}{'KS':>9}{'secs':>7}")
    for name, plan in configurations(args.reps, args.seed, args.alpha):
        plan = SimPlan(**{**plan.__dict__, "workers": args.workers})
        start = time.perf_counter()
        r = simulate_statistic(plan)
        print(f"{name:<20}{r.target_law.label():<10}{r.empirical_tail:>8.4f}{r.ks_distance:>9.4f}{time.perf_counter() - start:>7.2f}")


if __name__ == "__main__":
    main()
