"""Command-line interface: configs, reports, exit codes, determinism."""

import json

import pytest

from holotwist.cli import main

TRIVIAL = {
    "bundle": {"family": "trivial", "params": {"model": "sphere"}},
    "loop": {"name": "latitude", "params": {"theta": 1.0}},
    "numerics": {"sample_count": 20, "steps": 64},
}


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_list_examples_without_config(capsys):
    assert main(["list-examples"]) == 0
    out = capsys.readouterr().out
    assert "verdict: pass" in out


def test_list_examples_report_contents(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["list-examples", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["schema"] == "holotwist-report/1"
    assert "monopole" in rep["body"]["values"]["families"]
    assert "latitude" in rep["body"]["values"]["loops"]["sphere"]
    assert "cap-sweep" in rep["body"]["values"]["cylinders"]["sphere"]


def test_missing_config_is_usage_error(capsys):
    assert main(["validate"]) == 2
    assert "config" in capsys.readouterr().err


def test_invalid_json_is_usage_error(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["validate", "--config", str(p)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_family_reports_key_path(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"bundle": {"family": "nope"}})
    assert main(["validate", "--config", cfg]) == 2
    assert "bundle.family" in capsys.readouterr().err


def test_negative_tolerance_is_usage_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TRIVIAL)
    assert main(["validate", "--config", cfg, "--tol", "-1"]) == 2
    assert "positive" in capsys.readouterr().err


def test_validate_trivial_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TRIVIAL)
    out = tmp_path / "rep.json"
    assert main(["validate", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["body"]["verdict"] == "pass"
    assert "cocycle" in rep["body"]["checks"]
    text = capsys.readouterr().out
    assert "verdict: pass" in text


def test_hol1_trivial_is_identity(tmp_path):
    cfg = write_cfg(tmp_path, TRIVIAL)
    out = tmp_path / "rep.json"
    assert main(["hol1", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    mat = rep["body"]["values"]["holonomy"]
    assert mat[0][0] == pytest.approx([1.0, 0.0], abs=1e-9)
    assert mat[0][1] == pytest.approx([0.0, 0.0], abs=1e-9)
    assert rep["body"]["values"]["group"] == "E"


def test_report_body_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, TRIVIAL)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["validate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["validate", "--config", cfg, "--out", str(out2)]) == 0
    r1 = json.loads(out1.read_text())
    r2 = json.loads(out2.read_text())
    del r1["timings"], r2["timings"]
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_seed_override_changes_config_not_verdict(tmp_path):
    cfg = write_cfg(tmp_path, TRIVIAL)
    assert main(["validate", "--config", cfg, "--seed", "7"]) == 0


def test_expression_gauge_from_config(tmp_path):
    data = {
        "bundle": {"family": "trivial", "params": {"model": "sphere"}},
        "gauge": {"B": {"x": "0.3*y", "y": "-0.1*x*z", "z": "sin(x)"}},
        "numerics": {"sample_count": 15},
    }
    cfg = write_cfg(tmp_path, data)
    out = tmp_path / "rep.json"
    assert main(["gauge", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["body"]["verdict"] == "pass"


def test_expression_gauge_bad_coordinate(tmp_path, capsys):
    data = {
        "bundle": {"family": "trivial", "params": {"model": "sphere"}},
        "gauge": {"B": {"u": "0.3"}},
    }
    cfg = write_cfg(tmp_path, data)
    assert main(["gauge", "--config", cfg]) == 2
    assert "gauge.B" in capsys.readouterr().err


def test_random_gauge_on_torus(tmp_path):
    data = {
        "bundle": {"family": "torus-flat", "params": {"k": 1}},
        "gauge": {"seed": 3, "scale": 0.2},
        "numerics": {"sample_count": 15},
    }
    cfg = write_cfg(tmp_path, data)
    assert main(["gauge", "--config", cfg]) == 0


def test_failing_check_exits_one(tmp_path, capsys):
    # impossibly small tolerance on floating-point residuals
    data = json.loads(json.dumps(TRIVIAL))
    data["bundle"] = {"family": "monopole", "params": {"n": 1}}
    cfg = write_cfg(tmp_path, data)
    assert main(["validate", "--config", cfg, "--tol", "1e-300"]) == 1
    assert "verdict: fail" in capsys.readouterr().out


def test_reconstruct_trivial(tmp_path):
    data = {
        "bundle": {"family": "trivial", "params": {"model": "sphere"}},
        "reconstruct": {"samples_per_overlap": 1},
    }
    cfg = write_cfg(tmp_path, data)
    out = tmp_path / "rep.json"
    assert main(["reconstruct", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["body"]["checks"]["antisymmetry"] < 1e-8
    assert rep["body"]["checks"]["cocycle_central"] < 1e-8
    assert "e_01" in rep["body"]["values"]


def test_verify_trivial(tmp_path):
    cfg = write_cfg(tmp_path, TRIVIAL)
    assert main(["verify", "--config", cfg]) == 0
