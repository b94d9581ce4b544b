"""ReLU random-features regression and its equivalent linear Gaussian problem.

Inputs a ~ N(0, I_d), features x = ReLU(R a), labels
y = a^T beta1 + (a^T beta2)^2 with unit-norm beta1, beta2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from prune_dc import lab, nonasym
from prune_dc.lab import LgpModel, rng_for, sorted_eigh
from prune_dc.report import RiskReport, RiskRow

BETA_RTOL = 1e-10
MC_CHUNK = 20000
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class RfModel:
    R: np.ndarray = field(repr=False)
    beta1: np.ndarray = field(repr=False)
    beta2: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.ndim != 2:
            raise ValueError("R must be p x d")
        for name in ("beta1", "beta2"):
            v = np.asarray(getattr(self, name), dtype=float).ravel()
            if v.size != R.shape[1]:
                raise ValueError(f"{name} must have length d = {R.shape[1]}")
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"{name} must have unit norm")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "R", R)

    @property
    def p(self) -> int:
        return self.R.shape[0]

    @property
    def d(self) -> int:
        return self.R.shape[1]

    @classmethod
    def random(cls, p: int, d: int, n: int, seed) -> "RfModel":
        rng = rng_for(seed)
        R = rng.standard_normal((p, d))
        b1 = rng.standard_normal(d)
        b2 = rng.standard_normal(d)
        return cls(R, b1 / np.linalg.norm(b1), b2 / np.linalg.norm(b2), n)


def _draw(model: RfModel, rng, m: int):
    a = rng.standard_normal((m, model.d))
    X = np.maximum(a @ model.R.T, 0.0)
    y = a @ model.beta1 + (a @ model.beta2) ** 2
    return X, y


def rf_generate(model: RfModel, seed, n: int = None):
    return _draw(model, rng_for(seed), model.n if n is None else n)


def relu_cov(R) -> np.ndarray:
    """E[ReLU(r_i^T a) ReLU(r_j^T a)] for a ~ N(0, I).

    For jointly Gaussian (u, v) with std s_u, s_v and correlation rho
    (first-order arc-cosine kernel):
        E[ReLU(u) ReLU(v)] = s_u s_v (sqrt(1 - rho^2) + (pi - arccos rho) rho) / (2 pi).
    """
    R = np.asarray(R, dtype=float)
    norms = np.linalg.norm(R, axis=1)
    rho = np.clip((R @ R.T) / np.outer(norms, norms), -1.0, 1.0)
    np.fill_diagonal(rho, 1.0)
    k = (np.sqrt(1.0 - rho**2) + (np.pi - np.arccos(rho)) * rho) / (2.0 * np.pi)
    return np.outer(norms, norms) * k


def relu_label_moments(model: RfModel) -> tuple[np.ndarray, float]:
    """Closed forms of E[y x] and E[y^2].

    With u = r^T a, q = |r|^2, c = r^T beta2:
      E[ReLU(u) a^T beta1] = (r^T beta1) / 2             (Stein's lemma)
      E[ReLU(u) (a^T beta2)^2] = (q + c^2) / sqrt(2 pi q)
    and E[y^2] = 1 + 3 since a^T beta1 and a^T beta2 are standard normal
    and the cross term has an odd moment.
    """
    R = model.R
    q = np.sum(R * R, axis=1)
    c = R @ model.beta2
    b = 0.5 * (R @ model.beta1) + (q + c * c) * INV_SQRT_2PI / np.sqrt(q)
    return b, 4.0


@dataclass(frozen=True)
class EquivalentLgp:
    lgp: LgpModel
    mode: str
    samples: int
    condition: float


def _mc_moments(model: RfModel, samples: int, rng, need_cov: bool):
    p = model.p
    xx = np.zeros((p, p)) if need_cov else None
    yx = np.zeros(p)
    yy = 0.0
    done = 0
    while done < samples:
        m = min(MC_CHUNK, samples - done)
        X, y = _draw(model, rng, m)
        if need_cov:
            xx += X.T @ X
        yx += X.T @ y
        yy += float(y @ y)
        done += m
    return (None if xx is None else xx / samples), yx / samples, yy / samples


def equivalent_lgp(model: RfModel, mode: str = "analytic", samples: int = 200_000, seed=0) -> EquivalentLgp:
    """Sigma = E[x x^T], beta* = Sigma^-1 E[y x], sigma^2 = E[(y - x^T beta*)^2].

    Modes: ``mc`` estimates every moment by averaging, ``analytic_cov`` uses
    the arc-cosine covariance with Monte-Carlo label moments, ``analytic`` is
    fully closed form.
    """
    if mode not in ("mc", "analytic_cov", "analytic"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "analytic" and samples < 10 * model.p:
        raise ValueError("mc estimation needs at least 10 p samples")
    rng = rng_for(seed)
    if mode == "analytic":
        cov = relu_cov(model.R)
        b, yy = relu_label_moments(model)
        samples = 0
    else:
        cov_mc, b, yy = _mc_moments(model, samples, rng, need_cov=(mode == "mc"))
        cov = cov_mc if mode == "mc" else relu_cov(model.R)
    cov = 0.5 * (cov + cov.T)
    vals, vecs = sorted_eigh(cov)
    if vals[0] <= 0:
        raise ValueError("feature covariance is zero")
    keep = vals > BETA_RTOL * vals[0]
    if not np.all(keep):
        raise np.linalg.LinAlgError(
            f"feature covariance is numerically singular (condition > {1 / BETA_RTOL:.0e})"
        )
    beta = vecs @ ((vecs.T @ b) / vals)
    # sigma^2 = E[y^2] - b^T Sigma^-1 b, the residual of the population fit
    s2 = yy - float(b @ beta)
    lgp = LgpModel(cov, beta, math.sqrt(max(s2, 0.0)), model.n)
    return EquivalentLgp(lgp, mode, samples, float(vals[0] / vals[-1]))


def rf_population_risk(eq: EquivalentLgp, beta) -> float:
    """E[(y - x^T beta)^2] via the equivalent-LGP moments (exact identity)."""
    return lab.population_risk(eq.lgp, beta)


RF_METHODS = ("dense", "magnitude", "magnitude_rt_reuse", "magnitude_rt_fresh")


def _realization(p, d, n, s_targets, trials_data, seed, r_index, n_supports, eq_mode, eq_samples):
    rf = RfModel.random(p, d, n, rng_for(seed, r_index, 0))
    eq = equivalent_lgp(rf, mode=eq_mode, samples=eq_samples, seed=rng_for(seed, r_index, 1))
    lgp = eq.lgp
    theory = {("dense", p): nonasym.dense_dc_risk(lgp)}
    for s in s_targets:
        if s == p:
            for m in RF_METHODS[1:]:
                theory[(m, s)] = theory[("dense", p)]
            continue
        theory[("magnitude", s)] = nonasym.pruned_dc_risk(lgp, s=s, n_draws=n_supports, rng_seed=rng_for(seed, r_index, 2, s))[0]
        rt = None if s == n else nonasym.retrain_dc_risk(lgp, s=s, n_supports=n_supports, rng_seed=rng_for(seed, r_index, 3, s))[0]
        theory[("magnitude_rt_reuse", s)] = rt
        theory[("magnitude_rt_fresh", s)] = rt
    mc = {key: [] for key in theory}
    for t in range(trials_data):
        X, y = rf_generate(rf, rng_for(seed, r_index, 10 + t, 0))
        beta = lab.min_norm(X, y)
        mc[("dense", p)].append(rf_population_risk(eq, beta))
        fresh = None
        for s in s_targets:
            pruned = lab.prune_magnitude(beta, s)
            mc[("magnitude", s)].append(rf_population_risk(eq, pruned))
            support = lab.top_indices(np.abs(beta), s)
            if s == n:
                mc[("magnitude_rt_reuse", s)].append(math.nan)
                mc[("magnitude_rt_fresh", s)].append(math.nan)
                continue
            mc[("magnitude_rt_reuse", s)].append(rf_population_risk(eq, lab.least_squares(X, y, support)))
            if fresh is None:
                fresh = rf_generate(rf, rng_for(seed, r_index, 10 + t, 1))
            mc[("magnitude_rt_fresh", s)].append(rf_population_risk(eq, lab.least_squares(*fresh, support)))
    return theory, {key: float(np.mean(v)) for key, v in mc.items()}


def rf_pruning_experiment(
    p: int,
    s_targets,
    trials_R: int,
    trials_data: int,
    seed: int,
    d: int = 10,
    n: int = 200,
    n_supports: int = 32,
    eq_mode: str = "analytic",
    eq_samples: int = 200_000,
    threads: int = 1,
) -> RiskReport:
    """Theory (equivalent-LGP DC) and experiment (RF regression) per method.

    Each R realization contributes one theory value and the average of
    ``trials_data`` data draws; rows report the mean over realizations and
    the standard error across realizations. Rows are keyed by p; pruned
    methods carry their sparsity as a ``_s<count>`` suffix.
    """
    s_targets = [int(s) for s in s_targets]
    if trials_R < 1 or trials_data < 1:
        raise ValueError("trial counts must be >= 1")
    if any(not 1 <= s <= p for s in s_targets):
        raise ValueError("sparsity targets must lie in [1, p]")

    def work(r):
        return _realization(p, d, n, s_targets, trials_data, seed, r, n_supports, eq_mode, eq_samples)

    with threadpool_limits(limits=1):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(work, range(trials_R)))
        else:
            results = [work(r) for r in range(trials_R)]

    report = RiskReport()
    keys = [("dense", p)] + [(m, s) for s in s_targets for m in RF_METHODS[1:]]
    for key in keys:
        th = [res[0][key] for res in results]
        mc = [res[1][key] for res in results]
        th_mean = None if any(v is None for v in th) else float(np.mean(th))
        if any(math.isnan(v) for v in mc):
            mean, se = None, None
        else:
            mean, se = lab.mean_stderr(mc)
        name = key[0] if key[0] == "dense" else f"{key[0]}_s{key[1]}"
        report.add(RiskRow(float(p), name, th_mean, mean, se, trials_R * trials_data))
    return report
