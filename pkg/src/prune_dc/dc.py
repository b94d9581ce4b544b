"""Asymptotic distributional characterization (DC) of the min-norm solution.

Overparameterized (kappa = p/n > 1): the fixed point xi solves

    E_mu[ 1 / (1 + (xi Lambda)^-1) ] = 1/kappa,

gamma = (sigma^2 + E[B^2 Lambda / (1 + xi Lambda)^2])
        / (1 - kappa E[(1 + (xi Lambda)^-1)^-2]),

and sqrt(p) * beta_hat_i is distributed per atom as a Gaussian with mean
(1 - 1/(1 + xi Lambda)) B and std sqrt(kappa gamma) Lambda^-1/2 / (1 + (xi Lambda)^-1).

Underparameterized (kappa < 1): mean B, std sigma Lambda^-1/2 / sqrt(1/kappa - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from prune_dc.gaussian import abs_tail
from prune_dc.mu import MuDistribution, expect

XI_LO, XI_HI = 1e-12, 1e12
XI_LIMIT = 1e30
BISECT_STEPS = 80


@dataclass(frozen=True)
class MixtureComponent:
    lam: float
    b: float
    weight: float
    mean: float
    std: float


@dataclass(frozen=True)
class DcSolution:
    kappa: float
    sigma2: float
    xi: Optional[float]
    gamma: Optional[float]
    mu: MuDistribution = field(repr=False)
    mean: np.ndarray = field(repr=False)
    std: np.ndarray = field(repr=False)
    regime: str = "over"

    def __post_init__(self):
        for arr in (self.mean, self.std):
            arr.setflags(write=False)

    @property
    def lam(self):
        return self.mu.lam

    @property
    def b(self):
        return self.mu.b

    @property
    def w(self):
        return self.mu.w

    @property
    def components(self) -> tuple[MixtureComponent, ...]:
        return tuple(
            MixtureComponent(float(l), float(b), float(w), float(m), float(s))
            for l, b, w, m, s in zip(self.lam, self.b, self.w, self.mean, self.std)
        )

    @property
    def u_star(self) -> float:
        if self.regime != "over":
            raise AttributeError("u_star is defined for the overparameterized DC only")
        return self.xi * math.sqrt(self.gamma)

    @property
    def tau_star(self) -> float:
        if self.regime != "over":
            raise AttributeError("tau_star is defined for the overparameterized DC only")
        return math.sqrt(self.gamma)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` values of X from the mixture."""
        idx = rng.choice(len(self.w), size=size, p=self.w)
        return self.mean[idx] + self.std[idx] * rng.standard_normal(size)


def _kept_fraction(mu: MuDistribution, xi: float) -> float:
    return expect(mu, lambda lam, b: xi * lam / (1.0 + xi * lam))


def solve_xi(mu: MuDistribution, kappa: float) -> float:
    """Unique xi > 0 with E_mu[1/(1 + (xi Lambda)^-1)] = 1/kappa.

    The left side is strictly increasing from 0 to 1 in xi, so bisection on
    log(xi) converges unconditionally once the root is bracketed.
    """
    if not kappa > 1:
        raise ValueError(f"solve_xi needs kappa > 1, got {kappa}")
    target = 1.0 / kappa
    lo, hi = XI_LO, XI_HI
    while _kept_fraction(mu, lo) > target:
        lo *= 1e-3
        if lo < 1.0 / XI_LIMIT:
            raise ArithmeticError("xi bracket expansion failed (degenerate mu?)")
    while _kept_fraction(mu, hi) < target:
        hi *= 1e3
        if hi > XI_LIMIT:
            raise ArithmeticError("xi bracket expansion failed (degenerate mu?)")
    a, c = math.log(lo), math.log(hi)
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (a + c)
        if _kept_fraction(mu, math.exp(mid)) < target:
            a = mid
        else:
            c = mid
    xi = math.exp(0.5 * (a + c))
    # Two Newton steps in log(xi); d F / d log xi = E[q (1 - q)], q = xi L / (1 + xi L)
    for _ in range(2):
        resid = _kept_fraction(mu, xi) - target
        slope = expect(mu, lambda lam, b: (xi * lam) / (1.0 + xi * lam) ** 2)
        if slope <= 0:
            break
        step = xi * math.exp(-resid / slope)
        if abs(_kept_fraction(mu, step) - target) < abs(resid):
            xi = step
    return xi


def solve_gamma(mu: MuDistribution, kappa: float, sigma2: float, xi: float) -> float:
    num = sigma2 + expect(mu, lambda lam, b: b * b * lam / (1.0 + xi * lam) ** 2)
    den = 1.0 - kappa * expect(mu, lambda lam, b: (xi * lam / (1.0 + xi * lam)) ** 2)
    if not den > 0:
        raise ArithmeticError(f"gamma denominator is {den}; xi does not match (mu, kappa)")
    return num / den


def build_mixture(mu: MuDistribution, kappa: float, sigma2: float) -> DcSolution:
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    xi = solve_xi(mu, kappa)
    gamma = solve_gamma(mu, kappa, sigma2, xi)
    lam, b = mu.lam, mu.b
    q = xi * lam / (1.0 + xi * lam)  # = 1 - 1/(1 + xi lam) = 1/(1 + (xi lam)^-1)
    mean = q * b
    std = math.sqrt(kappa * gamma) * q / np.sqrt(lam)
    return DcSolution(kappa, sigma2, xi, gamma, mu, mean, std, "over")


def build_mixture_underparam(mu: MuDistribution, kappa: float, sigma2: float) -> DcSolution:
    if not 0 < kappa < 1:
        raise ValueError(f"underparameterized DC needs 0 < kappa < 1, got {kappa}")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    mean = np.array(mu.b, dtype=float)
    std = math.sqrt(sigma2) / np.sqrt(mu.lam) / math.sqrt(1.0 / kappa - 1.0)
    return DcSolution(kappa, sigma2, None, None, mu, mean, std, "under")


def solve_dc(mu: MuDistribution, kappa: float, sigma2: float) -> DcSolution:
    """Dispatch on kappa; kappa == 1 is the interpolation threshold and is rejected."""
    if kappa > 1:
        return build_mixture(mu, kappa, sigma2)
    if 0 < kappa < 1:
        return build_mixture_underparam(mu, kappa, sigma2)
    raise ValueError(f"no DC at kappa = {kappa}")


def mixture_tail(sol: DcSolution, t: float) -> float:
    """P(|X| >= t) under the DC mixture."""
    if t < 0 or math.isnan(t):
        raise ValueError(f"threshold must be >= 0, got {t}")
    return math.fsum(sol.w * abs_tail(sol.mean, sol.std, t))
