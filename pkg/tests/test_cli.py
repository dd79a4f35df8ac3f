import csv
import json
from pathlib import Path

import pytest
from conftest import C0

from fakepost.cli import dispatch

C0_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "c0.yaml"


@pytest.fixture
def bundle(tmp_path):
    out = tmp_path / "design.json"
    assert dispatch(["design", "--config", str(C0_CONFIG), "--out", str(out)]) == 0
    return out


def write_config(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    return str(path)


def test_design_bundle_contents(bundle):
    doc = json.loads(bundle.read_text())
    assert doc["design"]["eta"] == pytest.approx(C0["eta"], rel=1e-12)
    assert doc["design"]["R"] == pytest.approx(C0["R"], rel=1e-12)
    assert set(doc["design"]["diagnostics"]) == {
        "f_value", "kappa", "K_delta", "theta_2", "theta_star", "w_interval", "eta_bar", "eta_star_tilde", "gamma_lower",
    }
    manifest = json.loads(Path(str(bundle) + ".manifest.json").read_text())
    assert manifest["subcommand"] == "design" and manifest["argv"][0] == "design"


def test_design_to_stdout(capsys):
    assert dispatch(["design", "--config", str(C0_CONFIG)]) == 0
    assert json.loads(capsys.readouterr().out)["target"] == {"theta": 0.75, "delta": 0.28}


def test_invalid_config_exit_2(tmp_path, capsys):
    text = C0_CONFIG.read_text().replace("delta: 0.28", "delta: 0.25")
    assert dispatch(["design", "--config", write_config(tmp_path, text)]) == 2
    assert "delta <= alpha_R" in capsys.readouterr().err


def test_unknown_key_exit_2(tmp_path, capsys):
    text = C0_CONFIG.read_text() + "  zeta: 1\n"
    assert dispatch(["design", "--config", write_config(tmp_path, text)]) == 2
    assert "zeta" in capsys.readouterr().err


def test_missing_key_and_file(tmp_path):
    text = C0_CONFIG.read_text().replace("  p: 0.3\n", "")
    assert dispatch(["design", "--config", write_config(tmp_path, text)]) == 2
    assert dispatch(["design", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_not_designable_exit_3(tmp_path, capsys):
    text = C0_CONFIG.read_text() + "knobs:\n  eps: 0.5\n"
    assert dispatch(["design", "--config", write_config(tmp_path, text)]) == 3
    assert "theta_tilde_edge" in capsys.readouterr().err


def test_bad_knob_exit_2(tmp_path):
    assert dispatch(["design", "--config", str(C0_CONFIG), "--gamma-margin", "-1"]) == 2
    text = C0_CONFIG.read_text() + "knobs:\n  eps2: 1.0\n"
    assert dispatch(["design", "--config", write_config(tmp_path, text)]) == 2


def test_argparse_errors_exit_2():
    assert dispatch([]) == 2
    assert dispatch(["sweep", "--d", "0.1", "--out", "x.csv"]) == 2
    assert dispatch(["attractor", "--config", str(C0_CONFIG), "--post", "X"]) == 2


def test_verify_ne_round_trip(bundle, tmp_path):
    out = tmp_path / "ne.json"
    assert dispatch(["verify-ne", "--design", str(bundle), "--grid-step", "0.05", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["second_ne_exists"] is True
    assert rep["x_eta"] == pytest.approx(C0["x_eta"], rel=1e-12)
    assert rep["degradation_P"] == pytest.approx(C0["P"], rel=1e-10)
    assert [p["classification"] for p in rep["ne_list"]] == ["AI", "NonAI"]
    assert rep["ne_list"][0]["profile"][0] == 0.0
    assert {round(c["refined"][1], 6) for c in rep["candidates"]} == {round(C0["eta"], 6), round(C0["x_eta"], 6)}


def test_verify_ne_tampered_hash(bundle, tmp_path, capsys):
    doc = json.loads(bundle.read_text())
    doc["params"]["p"] = 0.31
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert dispatch(["verify-ne", "--design", str(bad)]) == 2
    assert "params_hash" in capsys.readouterr().err
    bad.write_text("{not json")
    assert dispatch(["verify-ne", "--design", str(bad)]) == 2


def test_attractor_json(bundle, capsys):
    assert dispatch(["attractor", "--design", str(bundle), "--post", "F"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["beta_star"] == pytest.approx(C0["beta_F_eta"], rel=1e-12)
    assert res["regime"] == "Saturated"
    assert dispatch(["attractor", "--config", str(C0_CONFIG), "--post", "R", "--mu0", "0", "--mu1", "0.9", "--mu2", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["beta_star"] == pytest.approx(0.243, abs=1e-15)


def test_attractor_profile_errors(bundle):
    assert dispatch(["attractor", "--design", str(bundle), "--post", "F", "--mu1", "0.5"]) == 2
    assert dispatch(["attractor", "--design", str(bundle), "--post", "F", "--mu0", "0", "--mu1", "0.5", "--mu2", "0.5"]) == 2
    assert dispatch(["attractor", "--post", "F"]) == 2


def test_simulate_outputs(bundle, tmp_path, capsys):
    out = tmp_path / "traj.csv"
    argv = ["simulate", "--design", str(bundle), "--post", "R", "--epochs", "2000", "--seed", "7", "--out", str(out)]
    assert dispatch(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["k", "beta", "participant_type", "tag"]
    assert len(rows) == 2001
    assert float(rows[-1][1]) == summary["final_beta"]
    manifest = json.loads(Path(str(out) + ".manifest.json").read_text())
    assert manifest["seeds"] == [7] and manifest["resolved"]["rng"] == "numpy.random.Philox"
    first = out.read_bytes()
    assert dispatch(argv) == 0
    assert out.read_bytes() == first


def test_sweep_outputs(tmp_path):
    out = tmp_path / "sweep.csv"
    assert dispatch(["sweep", "--d", "0.01,0.28", "--n", "40", "--seed", "3", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["d", "n", "frac_designable", "frac_P_lt_10", "mean_P", "n_second_ne", "master_seed"]
    assert [r[0] for r in rows[1:]] == ["0.01", "0.28"]
    manifest = json.loads(Path(str(out) + ".manifest.json").read_text())
    assert manifest["seeds"] == [3]
    assert manifest["resolved"]["knobs"]["gamma_margin"] == 0.2
    assert "P_denominator" in manifest["resolved"]["rows"][0]
    assert dispatch(["sweep", "--d", "0.01,1.5", "--n", "4", "--seed", "3", "--out", str(out)]) == 2
