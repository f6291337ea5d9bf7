import csv
import json

import pytest

from lane_emden_lab.cli import load_config, main


def _run(tmp_path, *argv):
    return main(["--output-dir", str(tmp_path), *argv])


def test_groundstate_writes_profile(tmp_path, capsys):
    assert _run(tmp_path, "groundstate", "--n", "3", "--p", "5") == 0
    data = json.loads((tmp_path / "profile.json").read_text())
    assert data["decay"]["log_base"] == "e"
    assert max(data["u"][0], data["v"][0]) == pytest.approx(1.0)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["exit_status"] == 0 and "timestamp" not in man
    assert "numpy" in man["versions"]


def test_greens_eval_and_verify(tmp_path):
    assert _run(tmp_path, "greens", "eval", "--x", "0.1,0.2,0", "--y", "-0.2,0.4,0.1",
                "--out", "g.json") == 0
    assert (tmp_path / "g.json").exists()
    assert _run(tmp_path, "greens", "verify", "--out", "asym.csv") == 0


def test_pohozaev_bubble_axis_is_one_based(tmp_path, capsys):
    assert _run(tmp_path, "pohozaev", "--center", "0.2,0,0", "--radius", "0.5", "--axis", "1") == 0
    rec = json.loads((tmp_path / "pohozaev.json").read_text())
    assert abs(rec["relative"]) < 1e-10
    assert _run(tmp_path, "pohozaev", "--axis", "4") == 2


def test_criterion_single_and_invalid_dimension(tmp_path, capsys):
    assert _run(tmp_path, "criterion", "--n", "5", "--p", "1", "--out", "c.csv") == 0
    rows = list(csv.DictReader((tmp_path / "c.csv").open()))
    assert rows[0]["verdict"] == "holds"
    assert _run(tmp_path, "criterion", "--n", "4") == 2
    assert "error" in capsys.readouterr().err


def test_criterion_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["criterion", "sweep", "--p-from", "1", "--p-to", "1.1", "--step", "0.05", "--out", "s.csv"]
    assert main(["--output-dir", str(a), *args]) == 0
    assert main(["--output-dir", str(b), *args]) == 0
    assert (a / "s.csv").read_bytes() == (b / "s.csv").read_bytes()
    assert len((a / "s.csv").read_text().splitlines()) == 4


def test_blowup_short_ladder_and_invalid_eps(tmp_path, capsys):
    assert _run(tmp_path, "blowup", "--steps", "2", "--out", "b.csv", "--run-dir", "run") == 0
    rows = list(csv.DictReader((tmp_path / "b.csv").open()))
    assert len(rows) == 2
    assert float(rows[1]["lambda"]) > float(rows[0]["lambda"])
    assert (tmp_path / "run" / "diagnostics.json").exists()
    sol = sorted((tmp_path / "run").glob("eps_*.json"))[0]
    assert _run(tmp_path, "pohozaev", "--solution", str(sol), "--center", "0.1,0,0",
                "--radius", "0.5", "--out", "poh.json") == 0
    assert json.loads((tmp_path / "poh.json").read_text())["relative"] < 1e-5
    assert _run(tmp_path, "blowup", "--eps0", "0.2") == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("deterministic = true\n[pohozaev]\nradius = 0.25  # smaller sphere\naxis = 2\n")
    parsed = load_config(cfg)
    assert parsed["pohozaev"]["radius"] == "0.25"
    assert _run(tmp_path, "--config", str(cfg), "pohozaev") == 0
    rec = json.loads((tmp_path / "pohozaev.json").read_text())
    assert rec["radius"] == 0.25 and rec["axis"] == 2
    cfg.write_text("[pohozaev]\nbogus = 1\n")
    assert _run(tmp_path, "--config", str(cfg), "pohozaev") == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LANE_EMDEN_LAB_OUTPUT", str(tmp_path / "env"))
    assert main(["pohozaev"]) == 0
    assert (tmp_path / "env" / "pohozaev.json").exists()


def test_argparse_errors_exit_two(tmp_path):
    assert _run(tmp_path, "groundstate") == 2
    assert _run(tmp_path, "nonsense") == 2
    assert _run(tmp_path, "--workers", "0", "pohozaev") == 2


def test_verify_all_quick_subset(tmp_path, capsys):
    assert _run(tmp_path, "verify-all", "--quick", "--only", "7", "--strict") == 0
    out = capsys.readouterr().out
    assert "criterion 7 PASS" in out
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["criteria"][0]["passed"] is True
