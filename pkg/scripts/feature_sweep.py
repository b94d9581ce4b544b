"""Theory curve and Monte-Carlo markers for the first-k-features sweep.

Prints one table per spiked variant: DC prediction and MC mean +- stderr for
dense / magnitude / Hessian / oracle pruning at each k.
"""

import argparse

from prune_dc.config import build_model, ModelSpec, default_grid
from prune_dc.lab import SweepPoint, mc_sweep
from prune_dc.theory import METHODS, risk_feature_sweep

ap = argparse.ArgumentParser()
ap.add_argument("--p", type=int, default=400)
ap.add_argument("--n", type=int, default=120)
ap.add_argument("--trials", type=int, default=50)
ap.add_argument("--points", type=int, default=8)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

for variant in ("spiked-beta", "spiked-cov"):
    model = build_model(ModelSpec(p=args.p, n=args.n, variant=variant))
    s = round(0.1 * args.p)
    grid = default_grid(s, args.p, args.n, args.points)
    mc = mc_sweep(lambda k: SweepPoint(model, int(k), s), grid, args.trials, METHODS, args.seed, threads=args.threads)
    print(f"\n== {variant}: p={args.p} n={args.n} s={s} trials={args.trials}")
    print("k".rjust(5) + "".join(f"{m:>26}" for m in METHODS))
    for k in grid:
        cells = []
        for m in METHODS:
            row = mc.get(float(k), m)
            th = risk_feature_sweep(model, k, s, m)
            cells.append(f"{th:10.2f} | {row.risk_mc_mean:8.2f}+-{row.risk_mc_stderr:<5.2f}")
        print(f"{k:5d}" + "".join(f"{c:>26}" for c in cells))
