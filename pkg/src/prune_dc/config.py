"""Experiment configuration: YAML document + flag overrides.

Schema (all keys optional except where a subcommand needs them)::

    kind: theory-sweep | mc-sweep | rf-experiment | dc-sample | ridge-gamma | rank-one
    seed: 0
    trials: 200
    methods: [dense, magnitude, hessian, oracle]
    grid: [400, 240, 80]          # k values (sweeps) or p/n ratios (rf-experiment)
    grid_points: 30               # default grid size when ``grid`` is absent
    model:
      p: 400
      n: 120
      sigma: 1.0
      covariance: spiked          # identity | spiked | diag-file | dense-file
      spike: 25.0
      spike_frac: 0.1
      variant: spiked-cov              # spiked-beta | spiked-cov (spiked only)
      cov_file: null              # whitespace-separated numbers
      beta: null                  # ones | file | null (variant default)
      beta_file: null
      beta_norm: null             # rescale beta* to this l2 norm
    sparsity_frac: 0.1            # s = round(sparsity_frac * p)
    rf: {d: 10, n: 200, s_frac: 0.1, s_multipliers: [1, 2, 4], trials_R: 10, trials_data: 5,
         n_supports: 32, eq_mode: analytic, eq_samples: 200000}
    ridge: {pbar: 2.0, lam: 1.0e-12}
    rank_one: {p: 20, n: 100, sigma: 1.0, s: 5}
    dc_sample: {draws: 1000}
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import yaml

from prune_dc.lab import LgpModel

KINDS = ("theory-sweep", "mc-sweep", "rf-experiment", "dc-sample", "ridge-gamma", "rank-one")


@dataclass
class ModelSpec:
    p: int = 400
    n: int = 120
    sigma: float = 1.0
    covariance: str = "spiked"
    spike: float = 25.0
    spike_frac: float = 0.1
    variant: str = "spiked-cov"
    cov_file: Optional[str] = None
    beta: Optional[str] = None
    beta_file: Optional[str] = None
    beta_norm: Optional[float] = None


@dataclass
class RfSpec:
    d: int = 10
    n: int = 200
    s_frac: float = 0.1
    s_multipliers: list = field(default_factory=lambda: [1, 2, 4])
    trials_R: int = 10
    trials_data: int = 5
    n_supports: int = 32
    eq_mode: str = "analytic"
    eq_samples: int = 200_000


@dataclass
class RidgeSpec:
    pbar: float = 2.0
    lam: float = 1e-12


@dataclass
class RankOneSpec:
    p: int = 20
    n: int = 100
    sigma: float = 1.0
    s: int = 5


@dataclass
class DcSampleSpec:
    draws: int = 1000


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    trials: int = 200
    methods: list = field(default_factory=lambda: ["dense", "magnitude", "hessian", "oracle"])
    grid: Optional[list] = None
    grid_points: int = 30
    sparsity_frac: float = 0.1
    model: ModelSpec = field(default_factory=ModelSpec)
    rf: RfSpec = field(default_factory=RfSpec)
    ridge: RidgeSpec = field(default_factory=RidgeSpec)
    rank_one: RankOneSpec = field(default_factory=RankOneSpec)
    dc_sample: DcSampleSpec = field(default_factory=DcSampleSpec)

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.seed is None or int(self.seed) < 0:
            raise ValueError("seed is required and must be a non-negative integer")
        if self.grid is not None and any(not (g > 0) for g in self.grid):
            raise ValueError("grid values must be positive")
        for name, frac in (("sparsity_frac", self.sparsity_frac), ("model.spike_frac", self.model.spike_frac), ("rf.s_frac", self.rf.s_frac)):
            if not 0 < frac <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        m = self.model
        if m.p < 1 or m.n < 1:
            raise ValueError("model.p and model.n must be >= 1")
        if not m.sigma >= 0:
            raise ValueError("model.sigma must be >= 0")
        return self

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_SECTIONS = {"model": ModelSpec, "rf": RfSpec, "ridge": RidgeSpec, "rank_one": RankOneSpec, "dc_sample": DcSampleSpec}


def config_from_dict(doc: dict) -> ExperimentConfig:
    doc = copy.deepcopy(doc)
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ValueError(f"section {key!r} must be a mapping")
            try:
                kwargs[key] = _SECTIONS[key](**value)
            except TypeError as exc:
                raise ValueError(f"bad key in section {key!r}: {exc}") from None
        else:
            kwargs[key] = value
    if "kind" not in kwargs:
        raise ValueError("config needs a 'kind'")
    if "seed" not in kwargs:
        raise ValueError("config needs an explicit 'seed'")
    try:
        return ExperimentConfig(**kwargs).validate()
    except TypeError as exc:
        raise ValueError(f"bad config key: {exc}") from None


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a key-value mapping")
    return doc


def spiked_spec(p: int, s_frac: float, C: float, variant: str = "spiked-cov"):
    """Spiked vector lam = (C,...,C,1,...,1) with ceil(s_frac p) spikes.

    spiked-beta: Sigma = I, beta* = sqrt(lam).  spiked-cov: Sigma = diag(lam), beta* = 1.
    Both give saliency Sigma_ii beta*_i^2 = lam_i.
    """
    if not 0 < s_frac < 1:
        raise ValueError("s_frac must lie in (0, 1)")
    if not C > 0:
        raise ValueError("spike C must be > 0")
    spikes = math.ceil(s_frac * p - 1e-9)
    lam = np.ones(p)
    lam[:spikes] = C
    if variant == "spiked-beta":
        return np.ones(p), np.sqrt(lam), variant
    if variant == "spiked-cov":
        return lam, np.ones(p), variant
    raise ValueError(f"unknown spiked variant {variant!r}")


def _read_numbers(path):
    return np.loadtxt(path, dtype=float, ndmin=1)


def build_model(spec: ModelSpec) -> LgpModel:
    p = spec.p
    if spec.covariance == "identity":
        cov, beta = np.ones(p), np.ones(p) / math.sqrt(p)
    elif spec.covariance == "spiked":
        cov, beta, _ = spiked_spec(p, spec.spike_frac, spec.spike, spec.variant)
    elif spec.covariance in ("diag-file", "dense-file"):
        if not spec.cov_file:
            raise ValueError(f"covariance {spec.covariance!r} needs cov_file")
        cov = _read_numbers(spec.cov_file)
        if spec.covariance == "dense-file":
            cov = cov.reshape(p, p) if cov.ndim == 1 else cov
        beta = np.ones(p) / math.sqrt(p)
    else:
        raise ValueError(f"unknown covariance {spec.covariance!r}")
    if spec.beta == "ones":
        beta = np.ones(p)
    elif spec.beta == "file":
        if not spec.beta_file:
            raise ValueError("beta: file needs beta_file")
        beta = _read_numbers(spec.beta_file)
    elif spec.beta is not None:
        raise ValueError(f"unknown beta spec {spec.beta!r}")
    if spec.beta_norm is not None:
        beta = beta * (spec.beta_norm / np.linalg.norm(beta))
    return LgpModel(cov, beta, spec.sigma, spec.n)


def default_grid(s: int, p: int, n: int, points: int = 30) -> list[int]:
    """Roughly log-spaced k values in [s, p], skipping the threshold k = n."""
    ks = np.unique(np.round(np.geomspace(s, p, points)).astype(int))
    return [int(k) for k in ks if k != n]
