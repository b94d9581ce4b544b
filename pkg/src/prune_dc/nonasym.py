"""Finite-p DC for general covariance, and the retraining DC built on it.

With Sigma = U diag(lam) U^T and beta_bar = U^T beta*, the min-norm solution
is modelled as

    beta_hat ~ U N((1 - zeta) * beta_bar, diag(phi / lam) / p),
    zeta_i = 1 / (1 + xi lam_i),  phi_i = kappa gamma (1 + (xi lam_i)^-1)^-2,

where (xi, gamma) solve the same fixed point as the asymptotic DC on the
empirical law of (lam_i, sqrt(p) beta_bar_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from prune_dc.dc import solve_gamma, solve_xi
from prune_dc.lab import LgpModel, population_risk, rng_for, top_indices
from prune_dc.mu import MuDistribution

PINV_RTOL = 1e-12


@dataclass(frozen=True)
class NonAsymptoticDc:
    kappa: float
    sigma2: float
    xi: float
    gamma: float
    lam: np.ndarray = field(repr=False)
    beta_bar: np.ndarray = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    rotation: Optional[np.ndarray] = field(repr=False)  # None means identity

    @property
    def p(self) -> int:
        return self.lam.size

    @property
    def mean(self) -> np.ndarray:
        """Mean in the eigenbasis."""
        return (1.0 - self.zeta) * self.beta_bar

    @property
    def var(self) -> np.ndarray:
        """Per-coordinate variance in the eigenbasis."""
        return self.phi / self.lam / self.p

    def rotate(self, v) -> np.ndarray:
        return v if self.rotation is None else self.rotation @ v

    def mean_vector(self) -> np.ndarray:
        return self.rotate(self.mean)

    def risk(self) -> float:
        """Expected population risk of a DC draw: sigma^2 + E (b - beta*)^T Sigma (b - beta*).

        Algebraically this collapses to gamma; it is assembled term by term
        here so the identity can be checked.
        """
        bias = math.fsum(self.lam * (self.zeta * self.beta_bar) ** 2)
        return self.sigma2 + bias + math.fsum(self.phi) / self.p


def build_nonasym(model: LgpModel) -> NonAsymptoticDc:
    p, n = model.p, model.n
    if not p > n:
        raise ValueError(f"non-asymptotic DC needs p > n (got p={p}, n={n})")
    if model.is_diagonal:
        lam, rot = np.array(model.cov), None
        beta_bar = np.array(model.beta_star)
    else:
        lam, rot = model.eig
        beta_bar = rot.T @ model.beta_star
    if not np.all(lam > 0):
        raise ValueError("covariance must be positive definite")
    kappa = p / n
    mu = MuDistribution.from_arrays(lam, math.sqrt(p) * beta_bar, provenance="constructed-from-model")
    sigma2 = model.sigma**2
    xi = solve_xi(mu, kappa)
    gamma = solve_gamma(mu, kappa, sigma2, xi)
    zeta = 1.0 / (1.0 + xi * lam)
    q = xi * lam / (1.0 + xi * lam)
    phi = kappa * gamma * q * q
    return NonAsymptoticDc(kappa, sigma2, xi, gamma, lam, beta_bar, zeta, phi, rot)


def sample_dc(dc: NonAsymptoticDc, rng_seed, size: Optional[int] = None) -> np.ndarray:
    """One draw (or ``size`` draws, as rows) from the rotated Gaussian."""
    rng = rng_for(rng_seed)
    shape = (dc.p,) if size is None else (size, dc.p)
    z = dc.mean + np.sqrt(dc.var) * rng.standard_normal(shape)
    if dc.rotation is None:
        return z
    return z @ dc.rotation.T


@dataclass(frozen=True)
class RetrainSpec:
    support: np.ndarray
    sigma_I: float
    cov_I: np.ndarray = field(repr=False)
    beta_I: np.ndarray = field(repr=False)

    def model(self, n: int) -> LgpModel:
        """The |I|-feature LGP solved by retraining."""
        return LgpModel(self.cov_I, self.beta_I[self.support], self.sigma_I, n)


def _psd_pinv(A, rtol=PINV_RTOL):
    vals, vecs = np.linalg.eigh(A)
    top = np.max(np.abs(vals)) if vals.size else 0.0
    inv = np.where(np.abs(vals) > rtol * top, 1.0 / np.where(vals == 0, 1.0, vals), 0.0)
    return (vecs * inv) @ vecs.T


def retrain_spec(model: LgpModel, support) -> RetrainSpec:
    """Effective LGP on the features in ``support``.

    beta_I = Sigma_I^+ Sigma beta* (zero off the support) and
    sigma_I^2 = sigma^2 + beta*^T Sigma beta* - beta_I^T Sigma_I beta_I.
    """
    idx = np.unique(np.asarray(support, dtype=int))
    if idx.size == 0:
        raise ValueError("support must be non-empty")
    if idx[0] < 0 or idx[-1] >= model.p:
        raise ValueError("support indices out of range")
    beta = model.beta_star
    sigma2 = model.sigma**2
    if model.is_diagonal:
        cov_I = model.cov[idx]
        b_I = beta[idx]
        missing = np.setdiff1d(np.arange(model.p), idx)
        s2 = sigma2 + math.fsum(model.cov[missing] * beta[missing] ** 2)
    else:
        cov = model.cov
        cov_I = cov[np.ix_(idx, idx)]
        b_I = _psd_pinv(cov_I) @ (cov @ beta)[idx]
        s2 = sigma2 + float(beta @ cov @ beta) - float(b_I @ cov_I @ b_I)
    beta_full = np.zeros(model.p)
    beta_full[idx] = b_I
    return RetrainSpec(idx, math.sqrt(max(s2, 0.0)), cov_I, beta_full)


def dense_dc_risk(model: LgpModel) -> float:
    """DC risk of the unpruned least-squares / min-norm fit."""
    p, n = model.p, model.n
    if p > n:
        return build_nonasym(model).risk()
    if p < n:
        return model.sigma**2 / (1.0 - p / n)
    raise ValueError("p = n is the interpolation threshold")


def _support_risk(model: LgpModel, support) -> float:
    spec = retrain_spec(model, support)
    return dense_dc_risk(spec.model(model.n))


def _sparsity(model, alpha, s):
    if s is None:
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        s = int(round(alpha * model.p))
    if not 1 <= s <= model.p:
        raise ValueError(f"s must lie in [1, {model.p}]")
    return s


def _stats(vals):
    v = np.asarray(vals, dtype=float)
    mean = math.fsum(v) / v.size
    se = math.sqrt(math.fsum((v - mean) ** 2) / (v.size - 1) / v.size) if v.size > 1 else 0.0
    return mean, se


def retrain_dc_risk(model: LgpModel, alpha: float = None, n_supports: int = 64, rng_seed=0, s: int = None):
    """Retraining DC risk averaged over sampled supports; returns (mean, stderr).

    Each support is the top-s magnitude set of one DC draw (stream j of
    ``rng_seed``); the retrained model is the DC of the restricted LGP,
    over- or under-parameterized depending on s versus n.
    """
    s = _sparsity(model, alpha, s)
    if s == model.n:
        raise ValueError("s = n is the interpolation threshold")
    if n_supports < 1:
        raise ValueError("n_supports must be >= 1")
    if s == model.p:
        return dense_dc_risk(model), 0.0
    dc = build_nonasym(model)
    risks = []
    for j in range(n_supports):
        draw = sample_dc(dc, rng_for(rng_seed, j))
        risks.append(_support_risk(model, top_indices(np.abs(draw), s)))
    return _stats(risks)


def pruned_dc_risk(model: LgpModel, alpha: float = None, n_draws: int = 64, rng_seed=0, s: int = None, prune="magnitude"):
    """Population risk of pruned DC draws (no retraining); returns (mean, stderr).

    Hessian pruning scores use the true diagonal of Sigma, the population
    limit of the empirical diagonal.
    """
    s = _sparsity(model, alpha, s)
    dc = build_nonasym(model)
    scale = np.sqrt(model.sigma_diag) if prune == "hessian" else None
    if prune not in ("magnitude", "hessian"):
        raise ValueError(f"unsupported pruning strategy {prune!r}")
    risks = []
    for j in range(n_draws):
        draw = sample_dc(dc, rng_for(rng_seed, j))
        score = np.abs(draw) if scale is None else scale * np.abs(draw)
        kept = np.zeros_like(draw)
        idx = top_indices(score, s)
        kept[idx] = draw[idx]
        risks.append(population_risk(model, kept))
    return _stats(risks)
