import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prune_dc.config import (
    ExperimentConfig,
    ModelSpec,
    build_model,
    config_from_dict,
    default_grid,
    load_config,
    spiked_spec,
)
from prune_dc.report import RiskReport, RiskRow, fmt_float


def test_spiked_spec_examples():
    cov, beta, v = spiked_spec(10, 0.1, 25.0, "spiked-cov")
    assert v == "spiked-cov" and np.count_nonzero(cov == 25.0) == 1 and np.all(beta == 1)
    cov_a, beta_a, _ = spiked_spec(10, 0.1, 25.0, "spiked-beta")
    np.testing.assert_array_equal(cov_a, np.ones(10))
    np.testing.assert_allclose(cov * beta**2, cov_a * beta_a**2)
    flat, ones, _ = spiked_spec(8, 0.5, 1.0)
    np.testing.assert_array_equal(flat * ones**2, np.ones(8))
    with pytest.raises(ValueError):
        spiked_spec(10, 0.1, 25.0, "fig9")
    with pytest.raises(ValueError):
        spiked_spec(10, 1.0, 25.0)


def test_build_model_variants(tmp_path):
    assert build_model(ModelSpec(p=9, covariance="identity")).beta_star @ np.ones(9) == pytest.approx(3.0)
    f = tmp_path / "cov.txt"
    f.write_text("1 0\n0 2\n")
    m = build_model(ModelSpec(p=2, n=1, covariance="dense-file", cov_file=str(f), beta="ones", beta_norm=2.0))
    assert not m.is_diagonal and np.linalg.norm(m.beta_star) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        build_model(ModelSpec(covariance="diag-file"))


def test_default_grid_skips_threshold():
    g = default_grid(40, 400, 120)
    assert 120 not in g and g[0] == 40 and g[-1] == 400 and g == sorted(g)


def test_config_requires_kind_and_seed():
    with pytest.raises(ValueError):
        config_from_dict({"kind": "mc-sweep"})
    with pytest.raises(ValueError):
        config_from_dict({"seed": 1})
    with pytest.raises(ValueError):
        config_from_dict({"kind": "mc-sweep", "seed": 1, "model": {"bogus": 1}})
    with pytest.raises(ValueError):
        config_from_dict({"kind": "mc-sweep", "seed": 1, "grid": [0]})
    with pytest.raises(ValueError):
        config_from_dict({"kind": "mc-sweep", "seed": 1, "sparsity_frac": 1.5})


def test_hash_changes_with_any_field():
    base = config_from_dict({"kind": "theory-sweep", "seed": 1})
    same = config_from_dict({"kind": "theory-sweep", "seed": 1})
    assert base.config_hash() == same.config_hash()
    for doc in (
        {"kind": "theory-sweep", "seed": 2},
        {"kind": "theory-sweep", "seed": 1, "trials": 3},
        {"kind": "theory-sweep", "seed": 1, "model": {"spike": 24.0}},
        {"kind": "theory-sweep", "seed": 1, "rf": {"d": 11}},
    ):
        assert config_from_dict(doc).config_hash() != base.config_hash()


def test_load_config(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("kind: ridge-gamma\nseed: 3\nridge: {pbar: 4.0}\n")
    cfg = config_from_dict(load_config(f))
    assert isinstance(cfg, ExperimentConfig) and cfg.ridge.pbar == 4.0
    f.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        load_config(f)


def test_fmt_float():
    assert fmt_float(None) == "" and fmt_float(math.nan) == ""
    assert fmt_float(0.1) == "0.10000000000000001"


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
opt = st.none() | finite
rows = st.builds(
    RiskRow,
    grid=finite,
    method=st.text(alphabet="abcdefgh_,\"", min_size=1, max_size=12),
    risk_theory=opt,
    risk_mc_mean=opt,
    risk_mc_stderr=st.none() | st.floats(0, 1e300),
    trials=st.integers(0, 10**6),
)


@given(st.lists(rows, max_size=10))
def test_csv_round_trip(rs):
    rep = RiskReport(list(rs))
    back = RiskReport.from_csv(rep.to_csv())
    assert back.rows == rep.rows
    assert "\r" not in rep.to_csv()


def test_report_errors():
    with pytest.raises(ValueError):
        RiskRow(1.0, "x", risk_mc_stderr=-1.0)
    with pytest.raises(ValueError):
        RiskReport.from_csv("a,b\n")
    with pytest.raises(KeyError):
        RiskReport().get(1.0, "dense")
