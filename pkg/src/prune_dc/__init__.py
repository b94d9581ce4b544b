"""Distributional characterization of min-norm least squares and pruning risk."""

from prune_dc.mu import MuAtom, MuDistribution, expect, from_model
from prune_dc.dc import (
    DcSolution,
    MixtureComponent,
    build_mixture,
    build_mixture_underparam,
    mixture_tail,
    solve_dc,
    solve_gamma,
    solve_xi,
)

__version__ = "0.1.0"

__all__ = [
    "MuAtom",
    "MuDistribution",
    "expect",
    "from_model",
    "DcSolution",
    "MixtureComponent",
    "build_mixture",
    "build_mixture_underparam",
    "mixture_tail",
    "solve_dc",
    "solve_gamma",
    "solve_xi",
]
