"""Command-line entry point: ``prune-dc <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from prune_dc import __version__, lab, nonasym, rf, theory
from prune_dc.config import (
    KINDS,
    build_model,
    config_from_dict,
    default_grid,
    load_config,
)
from prune_dc.report import RiskReport, RiskRow

THREADS_ENV = "PRUNE_DC_THREADS"


def _sweep_setup(cfg):
    model = build_model(cfg.model)
    if not model.is_diagonal:
        raise ValueError("feature sweeps need a diagonal covariance")
    s = int(round(cfg.sparsity_frac * model.p))
    if s < 1:
        raise ValueError("sparsity_frac * p rounds to zero")
    grid = [int(g) for g in cfg.grid] if cfg.grid is not None else default_grid(s, model.p, model.n, cfg.grid_points)
    for k in grid:
        if not s <= k <= model.p:
            raise ValueError(f"grid value k={k} outside [s={s}, p={model.p}]")
    for m in cfg.methods:
        lab.parse_method(m)
    return model, s, grid


def _theory_or_none(model, k, s, method):
    prune, mode = lab.parse_method(method)
    if mode != "none":
        return None
    return theory.risk_feature_sweep(model, k, s, prune)


def run_theory_sweep(cfg, threads):
    model, s, grid = _sweep_setup(cfg)
    report = RiskReport()
    for k in grid:
        for m in cfg.methods:
            th = None if k == model.n else _theory_or_none(model, k, s, m)
            report.add(RiskRow(float(k), m, th, None, None, 0))
    return report


def run_mc_sweep(cfg, threads):
    model, s, grid = _sweep_setup(cfg)
    live = [k for k in grid if k != model.n]
    mc = lab.mc_sweep(lambda k: lab.SweepPoint(model, int(k), s), live, cfg.trials, cfg.methods, cfg.seed, threads=threads)
    report = RiskReport()
    for k in grid:
        for m in cfg.methods:
            if k == model.n:
                report.add(RiskRow(float(k), m, None, None, None, 0))
                continue
            row = mc.get(float(k), m)
            report.add(RiskRow(float(k), m, _theory_or_none(model, k, s, m), row.risk_mc_mean, row.risk_mc_stderr, row.trials))
    return report


def run_rf_experiment(cfg, threads):
    spec = cfg.rf
    ratios = cfg.grid if cfg.grid is not None else [2, 4]
    base = max(1, int(round(spec.s_frac * spec.n)))
    report = RiskReport()
    for ratio in ratios:
        p = int(round(ratio * spec.n))
        if p == spec.n:
            raise ValueError("p/n = 1 is the interpolation threshold")
        s_targets = [min(p, base * int(m)) for m in spec.s_multipliers]
        sub = rf.rf_pruning_experiment(
            p,
            s_targets,
            spec.trials_R,
            spec.trials_data,
            cfg.seed,
            d=spec.d,
            n=spec.n,
            n_supports=spec.n_supports,
            eq_mode=spec.eq_mode,
            eq_samples=spec.eq_samples,
            threads=threads,
        )
        report.rows.extend(sub.rows)
    return report


def run_dc_sample(cfg, threads):
    """Per-coordinate rows: grid = index, theory = DC mean, mc = sample mean and stderr."""
    model = build_model(cfg.model)
    dc = nonasym.build_nonasym(model)
    draws = cfg.dc_sample.draws
    if draws < 2:
        raise ValueError("dc_sample.draws must be >= 2")
    samples = nonasym.sample_dc(dc, lab.rng_for(cfg.seed, 0), size=draws)
    mean = dc.mean_vector()
    report = RiskReport()
    for i in range(model.p):
        m, se = lab.mean_stderr(samples[:, i])
        report.add(RiskRow(float(i), "dc_sample", float(mean[i]), m, se, draws))
    return report


def run_ridge_gamma(cfg, threads):
    spec = cfg.ridge
    params = theory.RidgeParams(spec.pbar, spec.lam / spec.pbar)
    report = RiskReport()
    report.add(RiskRow(float(spec.pbar), "ridge_gamma", theory.ridge_gamma(params), None, None, 0))
    if spec.pbar != 1:
        report.add(RiskRow(float(spec.pbar), "ridge_gamma_limit", theory.ridge_gamma_limit(spec.pbar), None, None, 0))
    return report


def run_rank_one(cfg, threads):
    """Excess risks (risk minus sigma^2) for Sigma = lambda lambda^T with random lambda and beta*."""
    spec = cfg.rank_one
    rng = lab.rng_for(cfg.seed, 0)
    lam = rng.standard_normal(spec.p)
    beta = rng.standard_normal(spec.p) / math.sqrt(spec.p)
    model = lab.LgpModel(np.outer(lam, lam), beta, spec.sigma, spec.n)
    pruned_th, retrain_th = theory.rank_one_excess(lam, beta, spec.sigma**2, spec.n, spec.s)
    mc = lab.mc_sweep(
        lambda s: lab.SweepPoint(model, model.p, int(s)),
        [spec.s],
        cfg.trials,
        ["magnitude", "magnitude_rt_reuse"],
        cfg.seed,
        threads=threads,
    )
    report = RiskReport()
    s2 = spec.sigma**2
    for method, name, th in (("magnitude", "pruned_excess", pruned_th), ("magnitude_rt_reuse", "retrain_excess", retrain_th)):
        row = mc.get(float(spec.s), method)
        report.add(RiskRow(float(spec.s), name, th, row.risk_mc_mean - s2, row.risk_mc_stderr, row.trials))
    return report


RUNNERS = {
    "theory-sweep": run_theory_sweep,
    "mc-sweep": run_mc_sweep,
    "rf-experiment": run_rf_experiment,
    "dc-sample": run_dc_sample,
    "ridge-gamma": run_ridge_gamma,
    "rank-one": run_rank_one,
}


def run(cfg, out_path=None, threads=1) -> RiskReport:
    """Execute a validated config, write CSV (+ manifest) when ``out_path`` is set."""
    report = RUNNERS[cfg.kind](cfg, threads)
    report.manifest = {
        "kind": cfg.kind,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
    }
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
        with open(out_path + ".manifest.json", "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(report.manifest, sort_keys=True, indent=2) + "\n")
    return report


def _add_common(sp):
    sp.add_argument("--config", help="YAML config file")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="CSV output path (default: stdout)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--threads", type=int)


def _add_model_flags(sp):
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--covariance", choices=["identity", "spiked", "diag-file", "dense-file"])
    sp.add_argument("--spike", type=float)
    sp.add_argument("--spike-frac", type=float)
    sp.add_argument("--variant", choices=["spiked-beta", "spiked-cov"])
    sp.add_argument("--sparsity-frac", type=float)
    sp.add_argument("--grid", type=float, nargs="+")
    sp.add_argument("--methods", nargs="+")


def build_parser():
    ap = argparse.ArgumentParser(prog="prune-dc", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        _add_common(sp)
        if kind in ("theory-sweep", "mc-sweep", "dc-sample"):
            _add_model_flags(sp)
        if kind == "rf-experiment":
            sp.add_argument("--grid", type=float, nargs="+", help="p/n ratios")
            sp.add_argument("--trials-R", type=int, dest="trials_R")
            sp.add_argument("--trials-data", type=int)
            sp.add_argument("--eq-mode", choices=["mc", "analytic_cov", "analytic"])
        if kind == "ridge-gamma":
            sp.add_argument("--pbar", type=float)
            sp.add_argument("--lambda", type=float, dest="lam")
        if kind == "rank-one":
            sp.add_argument("--p", type=int)
            sp.add_argument("--n", type=int)
            sp.add_argument("--sigma", type=float)
            sp.add_argument("--s", type=int)
        if kind == "dc-sample":
            sp.add_argument("--draws", type=int)
    return ap


_MODEL_FLAGS = ("p", "n", "sigma", "covariance", "spike", "spike_frac", "variant")


def merge_flags(doc: dict, args) -> dict:
    """Apply command-line flags over the config document; flags win."""
    doc = dict(doc)
    doc["kind"] = args.kind
    a = vars(args)

    def put(section, key, value):
        if value is not None:
            doc.setdefault(section, {})
            doc[section] = {**doc[section], key: value}

    for key in ("seed", "trials"):
        if a.get(key) is not None:
            doc[key] = a[key]
    if a.get("sparsity_frac") is not None:
        doc["sparsity_frac"] = a["sparsity_frac"]
    if a.get("grid") is not None:
        doc["grid"] = a["grid"]
    if a.get("methods") is not None:
        doc["methods"] = a["methods"]
    if args.kind in ("theory-sweep", "mc-sweep", "dc-sample"):
        for key in _MODEL_FLAGS:
            put("model", key, a.get(key))
    if args.kind == "rf-experiment":
        for key in ("trials_R", "trials_data", "eq_mode"):
            put("rf", key, a.get(key))
    if args.kind == "ridge-gamma":
        put("ridge", "pbar", a.get("pbar"))
        put("ridge", "lam", a.get("lam"))
    if args.kind == "rank-one":
        for key in ("p", "n", "sigma", "s"):
            put("rank_one", key, a.get(key))
    if args.kind == "dc-sample":
        put("dc_sample", "draws", a.get("draws"))
    return doc


def resolve_threads(flag):
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_config(args.config) if args.config else {}
        if doc.get("kind") not in (None, args.kind):
            raise ValueError(f"config kind {doc['kind']!r} does not match subcommand {args.kind!r}")
        cfg = config_from_dict(merge_flags(doc, args))
        threads = resolve_threads(args.threads)
        if threads < 1:
            raise ValueError("threads must be >= 1")
        report = run(cfg, args.out, threads)
    except (ValueError, KeyError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        msg = " ".join(str(exc).split())
        print(f"prune-dc: error: {msg}", file=sys.stderr)
        return 2
    if not args.out:
        sys.stdout.write(report.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
