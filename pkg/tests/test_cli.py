import json

import pytest

from prune_dc.cli import main
from prune_dc.report import RiskReport


def _run(tmp_path, name, argv):
    out = tmp_path / name
    assert main(argv + ["--out", str(out)]) == 0
    return out.read_text(), json.loads((tmp_path / (name + ".manifest.json")).read_text())


def test_ridge_gamma_row(tmp_path):
    text, manifest = _run(tmp_path, "r.csv", ["ridge-gamma", "--seed", "0", "--pbar", "2", "--lambda", "1e-12"])
    row = RiskReport.from_csv(text).get(2.0, "ridge_gamma")
    assert row.risk_theory == pytest.approx(0.5, abs=1e-9)
    assert set(manifest) == {"kind", "config_hash", "seed", "version"}


def test_threshold_grid_point_is_empty(tmp_path):
    text, _ = _run(tmp_path, "t.csv", ["theory-sweep", "--seed", "0", "--grid", "400", "120"])
    rep = RiskReport.from_csv(text)
    assert rep.get(120.0, "hessian").risk_theory is None
    assert rep.get(400.0, "hessian").risk_theory > 0
    assert ",,,," in text.splitlines()[-1] or text.splitlines()[-1].endswith(",,,,0")


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("kind: ridge-gamma\nseed: 5\nridge: {pbar: 0.5, lam: 1.0e-12}\n")
    text, manifest = _run(tmp_path, "o.csv", ["ridge-gamma", "--config", str(cfg), "--pbar", "4"])
    assert RiskReport.from_csv(text).get(4.0, "ridge_gamma_limit").risk_theory == 0.75
    assert manifest["seed"] == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["theory-sweep"],  # no seed anywhere
        ["theory-sweep", "--seed", "0", "--grid", "10"],  # k below s
        ["mc-sweep", "--seed", "0", "--trials", "1"],
        ["theory-sweep", "--seed", "0", "--p", "0"],
        ["theory-sweep", "--seed", "0", "--config", "/nonexistent.yaml"],
    ],
)
def test_invalid_config_single_line_diagnostic(argv, capsys):
    assert main(argv) != 0
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith("prune-dc: error:")


def test_config_kind_mismatch(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("kind: mc-sweep\nseed: 1\n")
    assert main(["ridge-gamma", "--config", str(cfg)]) != 0
    assert "does not match" in capsys.readouterr().err


def test_threads_env_fallback(tmp_path, monkeypatch):
    argv = ["mc-sweep", "--seed", "3", "--trials", "3", "--grid", "400", "80"]
    a, _ = _run(tmp_path, "a.csv", argv + ["--threads", "1"])
    monkeypatch.setenv("PRUNE_DC_THREADS", "3")
    b, _ = _run(tmp_path, "b.csv", argv)
    assert a == b


def test_stdout_when_no_out(capsys):
    assert main(["ridge-gamma", "--seed", "0", "--pbar", "0.5", "--lambda", "0"]) == 0
    assert capsys.readouterr().out.startswith("grid,method,")
