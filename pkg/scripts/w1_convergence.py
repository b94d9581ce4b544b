"""W1 distance between sqrt(p) * min-norm coefficients and the DC mixture as p grows.

Identity covariance, kappa = 2, latent coefficients from the two-point law {0, 2}.
"""

import argparse
import math

import numpy as np
from scipy import stats

from prune_dc.dc import build_mixture
from prune_dc.lab import LgpModel, empirical_w1, generate, min_norm, rng_for
from prune_dc.mu import MuDistribution

ap = argparse.ArgumentParser()
ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
ap.add_argument("--trials", type=int, default=20)
ap.add_argument("--seed", type=int, default=8)
args = ap.parse_args()

mu = MuDistribution.from_arrays([1.0, 1.0], [0.0, 2.0])
sol = build_mixture(mu, 2.0, 1.0)
cdf = lambda x: np.sum(sol.w * stats.norm.cdf((x[:, None] - sol.mean) / sol.std), axis=1)

prev = None
for p in args.sizes:
    b = np.where(np.arange(p) % 2 == 0, 0.0, 2.0)
    model = LgpModel(np.ones(p), b / math.sqrt(p), 1.0, p // 2)
    vals = []
    for t in range(args.trials):
        X, y = generate(model, rng_for(args.seed, p, t))
        vals.append(empirical_w1(math.sqrt(p) * min_norm(X, y), cdf))
    w = float(np.mean(vals))
    ratio = "" if prev is None else f"  ratio to previous {w / prev:.3f}"
    print(f"p={p:5d}  W1={w:.4f}{ratio}")
    prev = w
