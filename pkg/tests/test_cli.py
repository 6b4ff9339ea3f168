import json

import pytest

from kvnlab import __version__
from kvnlab.cli import main
from kvnlab.observables import SERIES_COLUMNS


def run(tmp_path, *args, out="out"):
    d = tmp_path / out
    code = main([*args, "--out-dir", str(d)])
    return code, d


def cfg_file(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj))
    return str(p)


def files(d):
    return sorted(p.name for p in d.iterdir())


def test_evolve_writes_series_and_manifest(tmp_path):
    code, d = run(tmp_path, "evolve", "--steps", "40")
    assert code == 0
    lines = (d / "observables.csv").read_text().splitlines()
    assert lines[0] == ",".join(SERIES_COLUMNS)
    assert len(lines) == 42
    m = json.loads((d / "manifest.json").read_text())
    assert m["outputs"] == ["observables.csv"]
    assert m["version"] == __version__
    assert m["seed"] == 0 and m["config"]["steps"] == 40
    assert len(m["scenario_hash"]) == 16
    assert files(d) == sorted(m["outputs"] + ["manifest.json"])


def test_evolve_is_deterministic(tmp_path):
    _, a = run(tmp_path, "evolve", "--steps", "30", "--dt", "0.01", out="a")
    _, b = run(tmp_path, "evolve", "--steps", "30", "--dt", "0.01", out="b")
    assert (a / "observables.csv").read_bytes() == (b / "observables.csv").read_bytes()


def test_trajectory_outputs(tmp_path):
    code, d = run(tmp_path, "trajectory")
    assert code == 0
    assert (d / "extended_path.csv").read_text().startswith("t,x,v,lambda_x,lambda_v\n")
    assert files(d) == ["classical_path.csv", "extended_path.csv", "manifest.json"]


def test_action_check_on_quartic(tmp_path):
    from importlib import resources

    path = str(resources.files("kvnlab").joinpath("configs", "quartic.json"))
    code, d = run(tmp_path, "action-check", "--config", path)
    assert code == 0
    text = (d / "action_report.json").read_text()
    rep = json.loads(text)
    assert rep["on_shell"]["hamilton"]["classification"] == "stationary"
    assert rep["on_shell"]["schwinger_path"]["classification"] == "stationary"
    assert text == json.dumps(rep, sort_keys=True, indent=2) + "\n"


def test_action_check_degenerate_multiplier_fails(tmp_path):
    cfg = cfg_file(tmp_path, {"initial": {"lambda_x0": 0.0, "lambda_v0": 0.0}, "action": {"n_windows": 4}})
    code, d = run(tmp_path, "action-check", "--config", cfg)
    assert code == 4
    assert json.loads((d / "action_report.json").read_text())["degenerate_multiplier"]


def test_commutator_and_heisenberg_checks(tmp_path):
    code, d = run(tmp_path, "commutator-check", out="c")
    assert code == 0 and json.loads((d / "commutator_report.json").read_text())["passed"]
    code, d = run(tmp_path, "heisenberg-check", out="h")
    assert code == 0
    rep = json.loads((d / "heisenberg_report.json").read_text())
    assert [r["t"] for r in rep["dense"]] == [0.25, 0.5, 1.0]


def test_heisenberg_check_free_includes_closed_form(tmp_path):
    cfg = cfg_file(tmp_path, {"potential": {"kind": "free"}})
    code, d = run(tmp_path, "heisenberg-check", "--config", cfg)
    assert code == 0
    assert "free_closed_form" in json.loads((d / "heisenberg_report.json").read_text())


def test_config_error_exit_code(tmp_path):
    code, _ = run(tmp_path, "evolve", "--config", str(tmp_path / "missing.json"))
    assert code == 2
    code, _ = run(tmp_path, "evolve", "--config", cfg_file(tmp_path, {"potential": {"kind": "morse"}}))
    assert code == 2


def test_guard_violation_exit_code(tmp_path, capsys):
    code, d = run(tmp_path, "evolve", "--config", cfg_file(tmp_path, {"initial": {"sigma_x": 0.05}}))
    assert code == 3
    assert "sigma_x" in capsys.readouterr().err
    assert not d.exists()


def test_seed_override_changes_hash(tmp_path):
    run(tmp_path, "trajectory", out="a")
    run(tmp_path, "trajectory", "--seed", "5", out="b")
    a = json.loads((tmp_path / "a" / "manifest.json").read_text())
    b = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert b["seed"] == 5 and a["scenario_hash"] != b["scenario_hash"]


def test_accept_subset(tmp_path, capsys):
    code, d = run(tmp_path, "accept", "--only", "1", "8")
    assert code == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion 1" in out and "[PASS] criterion 8" in out
    rep = json.loads((d / "acceptance_report.json").read_text())
    assert sorted(rep["criteria"]) == ["1", "8"]
    assert "seconds" not in (d / "acceptance_report.json").read_text()


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for name in ("evolve", "trajectory", "action-check", "commutator-check", "heisenberg-check", "accept"):
        assert name in out
