"""Finite atom representation of the joint law of (Lambda, B)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MuAtom:
    lam: float
    b: float
    weight: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"atom eigenvalue must be finite and > 0, got {self.lam}")
        if not math.isfinite(self.b):
            raise ValueError(f"atom latent coefficient must be finite, got {self.b}")
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ValueError(f"atom weight must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class MuDistribution:
    """Weighted atoms (Lambda_i, B_i, w_i).

    Atom order is preserved so that atom i can be matched with feature i when
    the law was built from a concrete model.
    """

    atoms: tuple[MuAtom, ...]
    provenance: str = "synthetic"
    lam: np.ndarray = field(init=False, repr=False, compare=False)
    b: np.ndarray = field(init=False, repr=False, compare=False)
    w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValueError("MuDistribution needs at least one atom")
        object.__setattr__(self, "atoms", atoms)
        lam = np.array([a.lam for a in atoms], dtype=float)
        b = np.array([a.b for a in atoms], dtype=float)
        w = np.array([a.weight for a in atoms], dtype=float)
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"atom weights sum to {total!r}, expected 1")
        for arr in (lam, b, w):
            arr.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.atoms)

    @classmethod
    def from_arrays(cls, lam, b, weights=None, provenance="synthetic"):
        lam = np.asarray(lam, dtype=float).ravel()
        b = np.broadcast_to(np.asarray(b, dtype=float), lam.shape)
        if weights is None:
            weights = np.full(lam.shape, 1.0 / lam.size)
        weights = np.broadcast_to(np.asarray(weights, dtype=float), lam.shape)
        atoms = tuple(MuAtom(float(l), float(bb), float(ww)) for l, bb, ww in zip(lam, b, weights))
        return cls(atoms, provenance)


def from_model(sigma_diag: Sequence[float], beta_star: Sequence[float]) -> MuDistribution:
    """Empirical law of (Sigma_ii, sqrt(p) beta*_i) with uniform weights."""
    lam = np.asarray(sigma_diag, dtype=float).ravel()
    beta = np.asarray(beta_star, dtype=float).ravel()
    if lam.shape != beta.shape:
        raise ValueError(f"dimension mismatch: {lam.size} eigenvalues vs {beta.size} coefficients")
    if lam.size == 0:
        raise ValueError("need p >= 1")
    if np.any(~(lam > 0)):
        raise ValueError("covariance diagonal must be strictly positive")
    p = lam.size
    return MuDistribution.from_arrays(lam, math.sqrt(p) * beta, provenance="constructed-from-model")


def expect(mu: MuDistribution, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """Sum_i w_i f(Lambda_i, B_i).

    ``f`` is called once on the full atom arrays and must broadcast; a scalar
    return value is treated as a constant function.
    """
    vals = np.broadcast_to(np.asarray(f(mu.lam, mu.b), dtype=float), mu.w.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite on every atom")
    return math.fsum(mu.w * vals)
