"""Retraining on fresh versus reused data against the retraining DC.

Identity covariance at kappa = p/n = 2; sweeps the kept fraction alpha.
"""

import argparse
import math

import numpy as np

from prune_dc.lab import LgpModel, SweepPoint, mc_sweep
from prune_dc.nonasym import dense_dc_risk, retrain_dc_risk

ap = argparse.ArgumentParser()
ap.add_argument("--p", type=int, default=400)
ap.add_argument("--n", type=int, default=200)
ap.add_argument("--trials", type=int, default=100)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

model = LgpModel(np.ones(args.p), np.ones(args.p) / math.sqrt(args.p), 1.0, args.n)
print(f"dense DC risk {dense_dc_risk(model):.4f}")
print(f"{'alpha':>6} {'s':>5} {'retrain DC':>12} {'fresh MC':>18} {'reuse MC':>18}")
for alpha in (0.1, 0.25, 0.4, 0.45, 0.55, 0.75):
    s = int(round(alpha * args.p))
    if s == args.n:
        continue
    th, _ = retrain_dc_risk(model, s=s, n_supports=32, rng_seed=args.seed)
    rep = mc_sweep(lambda _: SweepPoint(model, args.p, s), [s], args.trials, ["magnitude_rt_fresh", "magnitude_rt_reuse"], args.seed)
    f = rep.get(float(s), "magnitude_rt_fresh")
    r = rep.get(float(s), "magnitude_rt_reuse")
    print(f"{alpha:6.2f} {s:5d} {th:12.4f} {f.risk_mc_mean:10.4f}+-{f.risk_mc_stderr:<6.4f} {r.risk_mc_mean:10.4f}+-{r.risk_mc_stderr:<6.4f}")
