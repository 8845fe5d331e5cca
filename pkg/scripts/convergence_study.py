"""Grid refinement of the harmonicity residual for a map with harmonic coordinates.

Prints h, sup-norm, predicted leading term and the ratio between successive
grids. Second-order convergence shows up as ratios near 4.
"""

import argparse

from slharmonic.connections import ConnectionFn
from slharmonic.darboux import harmonic_residual
from slharmonic.verify import harmonic_grid_map, predicted_sup


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--connection", default="canonical1")
    ap.add_argument("--sign", choices=["lemma", "example"], default="lemma")
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    c = ConnectionFn(args.connection, "iwasawa", "trace" if args.connection == "riemannian" else None)
    prev = None
    print(f"{'h':>8} {'sup':>12} {'predicted':>12} {'ratio':>7}")
    for k in range(args.levels):
        h = 0.04 / 2**k
        sup = harmonic_residual(harmonic_grid_map(h), c, "chart", args.sign).sup_norm
        ratio = f"{prev / sup:7.3f}" if prev else "      -"
        print(f"{h:8.4f} {sup:12.4e} {predicted_sup(h):12.4e} {ratio}")
        prev = sup


if __name__ == "__main__":
    main()
