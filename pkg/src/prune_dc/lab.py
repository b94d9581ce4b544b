"""Monte-Carlo ground truth for linear Gaussian problems (LGP).

Data: x ~ N(0, Sigma), y = x^T beta* + sigma z. Training is min-norm / least
squares; pruning is magnitude, Hessian (diagonal empirical covariance) or
oracle (saliency Sigma_ii beta*_i^2); retraining re-solves least squares on
the pruned support, either on the same data or on a fresh draw.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from threadpoolctl import threadpool_limits

from prune_dc.report import RiskReport, RiskRow

SVD_RCOND = 1e-12
PSD_TOL = 1e-10

STAGE_TRAIN = 0
STAGE_FRESH = 1

PRUNERS = ("magnitude", "hessian", "oracle")
RETRAIN_MODES = ("none", "reuse", "fresh")


def rng_for(seed, *counters) -> np.random.Generator:
    """Generator keyed by (seed, counters...); independent of call order."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counters)))


def sorted_eigh(cov) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by decreasing eigenvalue, each eigenvector signed so
    that its largest-magnitude entry is positive."""
    vals, vecs = np.linalg.eigh(np.asarray(cov, dtype=float))
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    piv = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[piv, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


@dataclass(frozen=True)
class LgpModel:
    """``cov`` is either a length-p vector (diagonal Sigma) or a p x p matrix."""

    cov: np.ndarray
    beta_star: np.ndarray
    sigma: float
    n: int

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        beta = np.array(self.beta_star, dtype=float).ravel()
        if cov.ndim == 1:
            if np.any(cov < 0):
                raise ValueError("diagonal covariance must be >= 0")
        elif cov.ndim == 2 and cov.shape[0] == cov.shape[1]:
            if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
                raise ValueError("covariance must be symmetric")
            cov = 0.5 * (cov + cov.T)
        else:
            raise ValueError("cov must be a vector or a square matrix")
        if cov.shape[0] != beta.size:
            raise ValueError("cov and beta_star dimensions differ")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        cov.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "beta_star", beta)
        if cov.ndim == 2:
            self.eig  # PSD check up front; the decomposition is cached for later use

    @property
    def p(self) -> int:
        return self.beta_star.size

    @property
    def kappa(self) -> float:
        return self.p / self.n

    @property
    def is_diagonal(self) -> bool:
        return self.cov.ndim == 1

    @property
    def sigma_diag(self) -> np.ndarray:
        return self.cov if self.is_diagonal else np.diag(self.cov).copy()

    @property
    def cov_matrix(self) -> np.ndarray:
        return np.diag(self.cov) if self.is_diagonal else self.cov

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_diagonal:
            order = np.argsort(-self.cov, kind="stable")
            return self.cov[order], np.eye(self.p)[:, order]
        vals, vecs = sorted_eigh(self.cov)
        if vals[-1] < -PSD_TOL * max(vals[0], 0.0):
            raise ValueError(f"covariance is not PSD (min eigenvalue {vals[-1]:.3g})")
        # eigenvalues at roundoff level are exact zeros (low-rank covariances)
        return np.where(vals > PSD_TOL * max(vals[0], 0.0), vals, 0.0), vecs

    @cached_property
    def cov_sqrt(self) -> np.ndarray:
        if self.is_diagonal:
            return np.sqrt(self.cov)
        vals, vecs = self.eig
        return (vecs * np.sqrt(vals)) @ vecs.T

    def restrict(self, k: int) -> "LgpModel":
        """First-k-feature model; dropped signal becomes noise (diagonal Sigma only)."""
        if not self.is_diagonal:
            raise ValueError("restrict needs a diagonal covariance")
        extra = math.fsum(self.cov[k:] * self.beta_star[k:] ** 2)
        return LgpModel(self.cov[:k], self.beta_star[:k], math.sqrt(self.sigma**2 + extra), self.n)


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    method_tag: str

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_hat)


def generate(model: LgpModel, seed, n: Optional[int] = None):
    rng = rng_for(seed)
    n = model.n if n is None else n
    g = rng.standard_normal((n, model.p))
    X = g * model.cov_sqrt if model.is_diagonal else g @ model.cov_sqrt
    y = X @ model.beta_star + model.sigma * rng.standard_normal(n)
    return X, y


def _pinv_solve(A, y, rcond=SVD_RCOND, full_row_rank=False):
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    if S.size == 0 or S[0] == 0:
        keep = np.zeros(S.size, dtype=bool)
    else:
        keep = S > rcond * S[0]
    if full_row_rank and int(keep.sum()) < A.shape[0]:
        raise np.linalg.LinAlgError(
            f"design is rank deficient: rank {int(keep.sum())} < n = {A.shape[0]} at rcond {rcond}"
        )
    return Vt[keep].T @ ((U[:, keep].T @ y) / S[keep])


def min_norm(X, y) -> np.ndarray:
    """Minimum l2-norm interpolator X^+ y for n < p; least squares otherwise."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n >= p:
        return least_squares(X, y)
    return _pinv_solve(X, y, full_row_rank=True)


def least_squares(X, y, support: Optional[Sequence[int]] = None) -> np.ndarray:
    """Least squares restricted to ``support`` (min-norm if underdetermined)."""
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if support is None:
        support = np.arange(p)
    support = np.asarray(support, dtype=int)
    if support.size == 0:
        raise ValueError("support must be non-empty")
    out = np.zeros(p)
    out[support] = _pinv_solve(X[:, support], np.asarray(y, dtype=float))
    return out


def top_indices(scores, s: int) -> np.ndarray:
    """Indices of the s largest scores; ties keep the lower index."""
    scores = np.asarray(scores, dtype=float)
    if not 0 <= s <= scores.size:
        raise ValueError(f"s must lie in [0, {scores.size}]")
    return np.sort(np.argsort(-scores, kind="stable")[:s])


def _keep(beta, idx):
    out = np.zeros_like(beta)
    out[idx] = beta[idx]
    return out


def prune_magnitude(beta, s: int) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    return _keep(beta, top_indices(np.abs(beta), s))


def prune_hessian(beta, s: int, X) -> np.ndarray:
    """Sigma_hat^-1/2 T_s(Sigma_hat^1/2 beta) with Sigma_hat = diag(X^T X)/n."""
    beta = np.asarray(beta, dtype=float)
    d = np.mean(np.asarray(X, dtype=float) ** 2, axis=0)
    if np.any(d <= 0):
        raise ValueError("empirical covariance has a zero diagonal entry")
    return _keep(beta, top_indices(np.sqrt(d) * np.abs(beta), s))


def prune_oracle(beta, s: int, sigma_diag, beta_star) -> np.ndarray:
    """Keep the s indices of largest saliency Sigma_ii beta*_i^2."""
    beta = np.asarray(beta, dtype=float)
    score = np.asarray(sigma_diag, dtype=float) * np.asarray(beta_star, dtype=float) ** 2
    return _keep(beta, top_indices(score, s))


def population_risk(model: LgpModel, beta) -> float:
    d = np.asarray(beta, dtype=float) - model.beta_star
    if d.size != model.p:
        raise ValueError("beta has the wrong dimension")
    if model.is_diagonal:
        return model.sigma**2 + math.fsum(model.cov * d * d)
    return model.sigma**2 + float(d @ model.cov @ d)


def _prune(kind, beta, s, X, sigma_diag, beta_star):
    if kind == "magnitude":
        return prune_magnitude(beta, s)
    if kind == "hessian":
        return prune_hessian(beta, s, X)
    if kind == "oracle":
        return prune_oracle(beta, s, sigma_diag, beta_star)
    raise ValueError(f"unknown pruning strategy {kind!r}")


def parse_method(method: str) -> tuple[str, str]:
    """'dense' | '<prune>' | '<prune>_rt_<reuse|fresh>' -> (prune, retrain_mode)."""
    if method == "dense":
        return "dense", "none"
    prune, _, mode = method.partition("_rt_")
    mode = mode or "none"
    if prune not in PRUNERS or mode not in RETRAIN_MODES:
        raise ValueError(f"unknown method {method!r}")
    return prune, mode


def _fit_methods(model: LgpModel, s: int, k: int, methods, seed, counters) -> dict:
    """One trial: shared training draw, every requested method evaluated on it."""
    X, y = generate(model, rng_for(seed, *counters, STAGE_TRAIN))
    Xk = X[:, :k]
    beta_k = min_norm(Xk, y)
    beta = np.zeros(model.p)
    beta[:k] = beta_k
    fresh = None
    out = {}
    for method in methods:
        prune, mode = parse_method(method)
        if prune == "dense":
            fit = beta
        else:
            pk = _prune(prune, beta_k, s, Xk, model.sigma_diag[:k], model.beta_star[:k])
            fit = np.zeros(model.p)
            fit[:k] = pk
            if mode != "none":
                support = np.flatnonzero(pk)
                if mode == "fresh":
                    if fresh is None:
                        fresh = generate(model, rng_for(seed, *counters, STAGE_FRESH))
                    Xr, yr = fresh
                else:
                    Xr, yr = X, y
                fit = np.zeros(model.p)
                fit[:k] = least_squares(Xr[:, :k], yr, support)
        out[method] = population_risk(model, fit)
    return out


def fit_pipeline(model: LgpModel, s: int, retrain_mode: str = "none", prune: str = "magnitude", seed=0) -> FitResult:
    """train -> prune (-> retrain) on all p features."""
    if retrain_mode not in RETRAIN_MODES:
        raise ValueError(f"unknown retrain mode {retrain_mode!r}")
    if not 1 <= s <= model.p:
        raise ValueError(f"s must lie in [1, {model.p}]")
    X, y = generate(model, rng_for(seed, 0, 0, STAGE_TRAIN))
    beta = min_norm(X, y)
    pruned = _prune(prune, beta, s, X, model.sigma_diag, model.beta_star)
    if retrain_mode == "none":
        return FitResult(pruned, prune)
    if retrain_mode == "fresh":
        X, y = generate(model, rng_for(seed, 0, 0, STAGE_FRESH))
    return FitResult(least_squares(X, y, np.flatnonzero(pruned)), f"retrain_{retrain_mode}")


def run_pipeline(model: LgpModel, s: int, retrain_mode: str = "none", prune: str = "magnitude", seed=0) -> float:
    return population_risk(model, fit_pipeline(model, s, retrain_mode, prune, seed).beta_hat)


@dataclass(frozen=True)
class SweepPoint:
    model: LgpModel
    k: int
    s: int


def mc_sweep(
    model_family: Callable[[float], SweepPoint],
    grid: Sequence[float],
    trials: int,
    methods: Sequence[str],
    seed: int,
    threads: int = 1,
    point_keys: Optional[Sequence[int]] = None,
) -> RiskReport:
    """Mean population risk and standard error per (grid value, method).

    Trial (point, t) draws from the stream keyed by (seed, key(point), t), where
    key defaults to the integer grid value, so results do not depend on the
    grid order or on ``threads``.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    for m in methods:
        parse_method(m)
    keys = [int(round(g)) for g in grid] if point_keys is None else list(point_keys)
    if len(set(keys)) != len(keys):
        raise ValueError("grid points must map to distinct seed keys")
    points = [model_family(g) for g in grid]
    tasks = [(i, t) for i in range(len(points)) for t in range(trials)]

    def work(task):
        i, t = task
        pt = points[i]
        return _fit_methods(pt.model, pt.s, pt.k, methods, seed, (keys[i], t))

    with threadpool_limits(limits=1):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(work, tasks))
        else:
            results = [work(task) for task in tasks]

    report = RiskReport()
    for i, g in enumerate(grid):
        chunk = results[i * trials : (i + 1) * trials]
        for m in methods:
            mean, se = mean_stderr([r[m] for r in chunk])
            report.add(RiskRow(float(g), m, None, mean, se, trials))
    return report


def mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    mean = math.fsum(v) / v.size
    if v.size < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2) / (v.size - 1)
    return mean, math.sqrt(var / v.size)


def empirical_w1(samples, cdf, grid_size: int = 20001) -> float:
    """W1 between the empirical law of ``samples`` and a continuous law given by
    its CDF: integral of |F_n - F| on a fine grid covering both supports."""
    x = np.sort(np.asarray(samples, dtype=float))
    lo, hi = x[0], x[-1]
    span = hi - lo
    grid = np.linspace(lo - 0.5 * span, hi + 0.5 * span, grid_size)
    fn = np.searchsorted(x, grid, side="right") / x.size
    return float(trapezoid(np.abs(fn - cdf(grid)), grid))
