import math

import numpy as np
import pytest

from prune_dc.lab import mean_stderr, rng_for
from prune_dc.nonasym import dense_dc_risk
from prune_dc.rf import (
    RfModel,
    equivalent_lgp,
    relu_cov,
    relu_label_moments,
    rf_generate,
    rf_population_risk,
    rf_pruning_experiment,
)


def test_model_validation():
    with pytest.raises(ValueError):
        RfModel(np.ones((3, 2)), np.array([1.0, 1.0]), np.array([1.0, 0.0]), 5)
    with pytest.raises(ValueError):
        RfModel(np.ones((3, 2)), np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0]), 5)


def test_zero_layer_gives_zero_features():
    m = RfModel(np.zeros((4, 3)), np.eye(3)[0], np.eye(3)[1], 7)
    X, _ = rf_generate(m, 0)
    assert X.shape == (7, 4) and np.all(X == 0)


def test_label_direct_evaluation():
    e1 = np.eye(4)[0]
    m = RfModel(np.eye(4), e1, e1, 1)
    a = np.array([[2.0, 0.0, 0.0, 0.0]])
    y = a @ m.beta1 + (a @ m.beta2) ** 2
    assert y[0] == 6.0


def test_label_mean_is_one():
    m = RfModel.random(5, 10, 100_000, 3)
    _, y = rf_generate(m, 4)
    mean, se = mean_stderr(y)
    assert abs(mean - 1.0) <= 3 * se


def test_relu_cov_special_cases():
    R = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    K = relu_cov(R)
    assert K[0, 0] == pytest.approx(0.5)
    assert K[0, 1] == pytest.approx(1 / (2 * math.pi))
    assert K[0, 2] == pytest.approx(0.5)


def test_relu_cov_matches_sampling():
    m = RfModel.random(6, 4, 1, 0)
    a = rng_for(1).standard_normal((200_000, 4))
    X = np.maximum(a @ m.R.T, 0.0)
    emp = X.T @ X / a.shape[0]
    prod = X[:, :, None] * X[:, None, :]
    se = prod.std(axis=0) / math.sqrt(a.shape[0])
    assert np.all(np.abs(emp - relu_cov(m.R)) <= 5 * se + 1e-12)


def test_label_moments_match_sampling():
    m = RfModel.random(6, 4, 1, 2)
    a = rng_for(5).standard_normal((400_000, 4))
    X = np.maximum(a @ m.R.T, 0.0)
    y = a @ m.beta1 + (a @ m.beta2) ** 2
    b, yy = relu_label_moments(m)
    vals = X * y[:, None]
    se = vals.std(axis=0) / math.sqrt(a.shape[0])
    assert np.all(np.abs(vals.mean(axis=0) - b) <= 5 * se)
    assert yy == 4.0 and abs(np.mean(y * y) - 4.0) <= 5 * np.std(y * y) / math.sqrt(y.size)


def test_equivalent_modes_agree():
    m = RfModel.random(20, 10, 50, 7)
    ana = equivalent_lgp(m, "analytic")
    cov = equivalent_lgp(m, "analytic_cov", samples=100_000, seed=1)
    mc = equivalent_lgp(m, "mc", samples=100_000, seed=1)
    np.testing.assert_allclose(ana.lgp.cov, cov.lgp.cov)
    assert np.max(np.abs(mc.lgp.cov - ana.lgp.cov)) < 0.02 * np.max(ana.lgp.cov)
    assert mc.lgp.sigma == pytest.approx(ana.lgp.sigma, rel=0.05)
    assert ana.samples == 0 and ana.condition >= 1


def test_equivalent_residual_orthogonal_to_features():
    m = RfModel.random(15, 10, 40, 8)
    eq = equivalent_lgp(m, "analytic")
    X, y = rf_generate(m, 9, n=200_000)
    r = y - X @ eq.lgp.beta_star
    se = np.std(r[:, None] * X, axis=0) / math.sqrt(y.size)
    assert np.all(np.abs((r[:, None] * X).mean(axis=0)) <= 5 * se)
    assert rf_population_risk(eq, eq.lgp.beta_star) == pytest.approx(eq.lgp.sigma**2)


def test_equivalent_lgp_errors():
    m = RfModel.random(20, 10, 50, 7)
    with pytest.raises(ValueError):
        equivalent_lgp(m, "other")
    with pytest.raises(ValueError):
        equivalent_lgp(m, "mc", samples=100)
    twin = RfModel(np.vstack([m.R[:1], m.R[:1]]), m.beta1, m.beta2, 50)
    with pytest.raises(np.linalg.LinAlgError):
        equivalent_lgp(twin, "analytic")


def test_experiment_full_support_theory_is_dense_dc():
    p, n = 60, 30
    rep = rf_pruning_experiment(p, [p], 1, 2, seed=4, n=n, n_supports=2)
    eq = equivalent_lgp(RfModel.random(p, 10, n, rng_for(4, 0, 0)), "analytic")
    dense = dense_dc_risk(eq.lgp)
    assert rep.get(float(p), "dense").risk_theory == pytest.approx(dense)
    assert rep.get(float(p), f"magnitude_s{p}").risk_theory == pytest.approx(dense)


def test_experiment_deterministic_across_threads():
    a = rf_pruning_experiment(60, [6, 12], 2, 2, seed=1, n=30, n_supports=2)
    b = rf_pruning_experiment(60, [6, 12], 2, 2, seed=1, n=30, n_supports=2, threads=2)
    assert a.to_csv() == b.to_csv()
    with pytest.raises(ValueError):
        rf_pruning_experiment(60, [0], 1, 1, seed=1, n=30)
