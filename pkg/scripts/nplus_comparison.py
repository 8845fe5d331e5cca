"""Integrate an N+ geodesic and tabulate per-entry deviations from the
matrix-log oracle and from both readings of the printed closed form."""

import argparse

import numpy as np

from slharmonic.connections import ConnectionFn
from slharmonic.geodesics import (
    GeodesicProblem,
    closed_form_nplus_oracle,
    closed_form_nplus_paper,
    compare_trajectories,
    integrate_geodesic,
    nplus_evaluator,
)
from slharmonic.iwasawa import ChartPoint


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--horizon", type=float, default=1.0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    v0 = np.triu(rng.uniform(0.5, 1.5, (args.n, args.n)) * rng.choice([-1.0, 1.0], (args.n, args.n)), 1)
    prob = GeodesicProblem(ConnectionFn("alpha"), ChartPoint.identity(args.n), v0, args.horizon, args.steps)
    tr = integrate_geodesic(prob)

    reports = {
        "oracle": compare_trajectories(tr, nplus_evaluator(closed_form_nplus_oracle, v0)),
        "proposition": compare_trajectories(tr, nplus_evaluator(closed_form_nplus_paper, v0)),
        "remark": compare_trajectories(
            tr, nplus_evaluator(closed_form_nplus_paper, v0, reading="remark")
        ),
    }
    labels = [lab for lab in tr.labels() if lab.startswith("y")]
    print(f"{'entry':>6}" + "".join(f"{k:>14}" for k in reports))
    for lab in labels:
        print(f"{lab:>6}" + "".join(f"{r.deviation(lab):14.3e}" for r in reports.values()))
    print("verdicts: " + ", ".join(f"{k}={r.verdict}" for k, r in reports.items()))


if __name__ == "__main__":
    main()
