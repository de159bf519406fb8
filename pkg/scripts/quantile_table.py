"""Print a table of F alpha-points with their round-trip error."""

import argparse

from qlanova import FDist, alpha_point, upper_tail


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha", type=float, nargs="+", default=[0.1, 0.05, 0.01])
    parser.add_argument("--d1", type=int, nargs="+", default=[1, 2, 3, 5, 10])
    parser.add_argument("--d2", type=int, nargs="+", default=[1, 4, 12, 60])
    args = parser.parse_args()

    for a in args.alpha:
        print(f"alpha = {a}")
        print("d2\\d1 " + "".join(f"{d1:>14}" for d1 in args.d1))
        worst = 0.0
        for d2 in args.d2:
            cells = []
            for d1 in args.d1:
                point = alpha_point(FDist(d1, d2), a).value
                worst = max(worst, abs(upper_tail(FDist(d1, d2), point) - a))
                cells.append(f"{point:>14.6g}")
            print(f"{d2:<6}" + "".join(cells))
        print(f"max |tail(point) - alpha| = {worst:.2e}\n")


if __name__ == "__main__":
    main()
