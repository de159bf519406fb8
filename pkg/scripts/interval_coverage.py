"""Monte-Carlo coverage of the mean interval across sample sizes."""

import argparse

import numpy as np

from qlanova.measurement import interval_bounds


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 5, 10, 30])
    args = parser.parse_args()

    gen = np.random.Generator(np.random.Philox(args.seed))
    print(f"nominal {1 - args.alpha:.3f}")
    for n in args.sizes:
        lower, upper = interval_bounds(gen.standard_normal((args.reps, n)), args.alpha)
        covered = np.mean((lower < 0) & (0 < upper))
        print(f"n={n:<4} coverage {covered:.4f}  mean width {np.mean(upper - lower):.4f}")


if __name__ == "__main__":
    main()
