"""Pruning thresholds and closed-form risks built on the DC mixture."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from prune_dc.dc import DcSolution, solve_dc
from prune_dc.gaussian import abs_tail, thresholded_sq_error
from prune_dc.mu import MuDistribution

THRESH_STEPS = 200
THRESH_SPAN = 40.0


@dataclass(frozen=True)
class ThresholdResult:
    t_star: float
    t_diamond: float
    alpha: float


@dataclass(frozen=True)
class RidgeParams:
    p_bar: float
    lambda_bar: float

    def __post_init__(self):
        if not self.p_bar > 0:
            raise ValueError("p_bar must be > 0")
        if not self.lambda_bar >= 0:
            raise ValueError("lambda_bar must be >= 0")


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise ValueError(f"sparsity alpha must lie in (0, 1], got {alpha}")


def _mixture_threshold(w, mean, std, alpha):
    """sup{t >= 0 : P(|X| >= t) >= alpha} by bisection on the tail."""
    _check_alpha(alpha)
    if alpha == 1:
        return 0.0
    if not np.any(std > 0):
        raise ValueError("threshold undefined for a point-mass mixture with alpha < 1")

    def tail(t):
        return math.fsum(w * abs_tail(mean, std, t))

    lo = 0.0
    hi = float(np.max(np.abs(mean) + THRESH_SPAN * std))
    if tail(hi) >= alpha:  # only possible with point masses far out
        return hi
    for _ in range(THRESH_STEPS):
        mid = 0.5 * (lo + hi)
        if tail(mid) >= alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(hi, 1.0):
            break
    return lo


def _scaled(sol: DcSolution):
    """Components of Lambda^1/2 X together with the target Lambda^1/2 B."""
    root = np.sqrt(sol.lam)
    return root * sol.b, root * sol.mean, root * sol.std


def threshold_magnitude(sol: DcSolution, alpha: float) -> float:
    return _mixture_threshold(sol.w, sol.mean, sol.std, alpha)


def threshold_hessian(sol: DcSolution, alpha: float) -> float:
    _, m, s = _scaled(sol)
    return _mixture_threshold(sol.w, m, s, alpha)


def thresholds(sol: DcSolution, alpha: float) -> ThresholdResult:
    return ThresholdResult(threshold_magnitude(sol, alpha), threshold_hessian(sol, alpha), alpha)


def risk_dense(sol: DcSolution) -> float:
    per = sol.lam * ((sol.b - sol.mean) ** 2 + sol.std**2)
    return sol.sigma2 + math.fsum(sol.w * per)


def risk_magnitude(sol: DcSolution, alpha: float) -> float:
    """sigma^2 + E[Lambda (B - T_t*(X))^2]."""
    t = threshold_magnitude(sol, alpha)
    per = sol.lam * thresholded_sq_error(sol.b, sol.mean, sol.std, t)
    return sol.sigma2 + math.fsum(sol.w * per)


def risk_hessian(sol: DcSolution, alpha: float) -> float:
    """sigma^2 + E[(Lambda^1/2 B - T_t<>(Lambda^1/2 X))^2]."""
    target, m, s = _scaled(sol)
    t = _mixture_threshold(sol.w, m, s, alpha)
    return sol.sigma2 + math.fsum(sol.w * thresholded_sq_error(target, m, s, t))


def risk_pruned_all(sol: DcSolution) -> float:
    """Limit alpha -> 0: every coefficient is pruned."""
    return sol.sigma2 + math.fsum(sol.w * sol.lam * sol.b**2)


def risk_oracle(sol: DcSolution, keep) -> float:
    """Risk when exactly the atoms flagged in ``keep`` survive pruning.

    Used for saliency (oracle) pruning, where the kept index set is fixed in
    advance and does not depend on the fitted coefficients.
    """
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != sol.w.shape:
        raise ValueError("keep mask must have one entry per atom")
    kept = (sol.b - sol.mean) ** 2 + sol.std**2
    per = sol.lam * np.where(keep, kept, sol.b**2)
    return sol.sigma2 + math.fsum(sol.w * per)


def saliency_order(sigma_diag, beta_star) -> np.ndarray:
    """Indices sorted by decreasing Sigma_ii beta*_i^2 (stable, low index first on ties)."""
    score = np.asarray(sigma_diag, dtype=float) * np.asarray(beta_star, dtype=float) ** 2
    return np.argsort(-score, kind="stable")


def risk_subset(total_energy: float, subset_energy: float, sigma2: float, kappa_s: float) -> float:
    """Least-squares risk on a fixed feature subset, missing energy acting as noise."""
    if not 0 < kappa_s < 1:
        raise ValueError(f"kappa_s must lie in (0, 1), got {kappa_s}")
    if subset_energy > total_energy * (1 + 1e-12) + 1e-15 or subset_energy < 0:
        raise ValueError("need 0 <= subset_energy <= total_energy")
    return (total_energy - subset_energy + sigma2) / (1.0 - kappa_s)


def rank_one_excess(lambda_vec, beta_star, sigma2: float, n: int, s: int) -> tuple[float, float]:
    """Expected excess risks (pruned, retrained) for Sigma = lambda lambda^T."""
    lam = np.asarray(lambda_vec, dtype=float).ravel()
    beta = np.asarray(beta_star, dtype=float).ravel()
    if n <= 2:
        raise ValueError("rank-one excess risk needs n > 2")
    if not np.any(lam != 0):
        raise ValueError("lambda must be non-zero")
    if not 1 <= s <= lam.size:
        raise ValueError(f"s must lie in [1, {lam.size}]")
    kept = np.sort(lam**2)[::-1][:s].sum()
    zeta = kept / np.dot(lam, lam)
    c = float(np.dot(lam, beta))
    pruned = zeta**2 * sigma2 / (n - 2) + (1 - zeta) ** 2 * c * c
    return float(pruned), sigma2 / (n - 2)


def ridge_gamma(params: RidgeParams) -> float:
    lb, pinv = params.lambda_bar, 1.0 / params.p_bar
    a = 1.0 - lb - pinv
    return 0.5 * (a + math.sqrt(a * a + 4.0 * lb))


def ridge_gamma_limit(p_bar: float) -> float:
    """lambda -> 0 limit of ``ridge_gamma``."""
    if p_bar == 1:
        raise ValueError("limit is not taken at p_bar = 1")
    return 0.0 if p_bar < 1 else 1.0 - 1.0 / p_bar


def ridge_h2(params: RidgeParams, signal: float, sigma2: float) -> float:
    """Ridge fluctuation term h^2; only the p_bar < 1 branch is trusted."""
    if params.p_bar >= 1:
        raise ValueError("ridge h^2 is only available for p_bar < 1 (the p_bar > 1 branch is known to be inconsistent)")
    lb, pinv = params.lambda_bar, 1.0 / params.p_bar
    gamma = ridge_gamma(params)
    a = 1.0 + pinv + lb
    shrink = 0.5 * (a - math.sqrt(a * a - 4.0 * pinv))
    den = pinv / shrink**2 - 1.0
    return (signal * gamma**2 + sigma2) / den


METHODS = ("dense", "magnitude", "hessian", "oracle")


def _feature_dc(sigma_diag, beta_star, sigma2, n, k):
    lam = np.asarray(sigma_diag, dtype=float)
    beta = np.asarray(beta_star, dtype=float)
    sigma2_k = sigma2 + math.fsum(lam[k:] * beta[k:] ** 2)
    mu = MuDistribution.from_arrays(lam[:k], math.sqrt(k) * beta[:k], provenance="constructed-from-model")
    return solve_dc(mu, k / n, sigma2_k)


def risk_feature_sweep(model, k: int, s: int, method: str) -> float:
    """Theoretical risk when fitting the first k features and pruning to s.

    ``model`` needs diagonal covariance; features beyond k are folded into the
    noise. Pruning operates on the k fitted coefficients, so alpha = s/k.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if not model.is_diagonal:
        raise ValueError("feature sweeps need a diagonal covariance")
    p, n = model.p, model.n
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, {p}]")
    if k == n:
        raise ValueError("k = n is the interpolation threshold; risk diverges")
    if not 1 <= s <= k:
        raise ValueError(f"s must lie in [1, k={k}]")
    lam = model.sigma_diag
    sol = _feature_dc(lam, model.beta_star, model.sigma**2, n, k)
    alpha = s / k
    if method == "dense" or s == k:
        return risk_dense(sol)
    if method == "magnitude":
        return risk_magnitude(sol, alpha)
    if method == "hessian":
        return risk_hessian(sol, alpha)
    keep = np.zeros(k, dtype=bool)
    keep[saliency_order(lam[:k], model.beta_star[:k])[:s]] = True
    return risk_oracle(sol, keep)
