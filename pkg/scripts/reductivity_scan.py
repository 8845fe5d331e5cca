"""Sampled Ad(SO(n)) deviation of both complements for a range of n."""

import argparse

from slharmonic.lie_algebra import check_reductivity


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print(f"{'n':>3} {'iwasawa':>12} {'cartan':>12}")
    for n in range(2, args.max_n + 1):
        iw = check_reductivity("iwasawa", args.samples, args.seed, n=n)
        ca = check_reductivity("cartan", args.samples, args.seed, n=n)
        print(f"{n:3d} {iw.max_relative_deviation:12.4e} {ca.max_relative_deviation:12.4e}")


if __name__ == "__main__":
    main()
