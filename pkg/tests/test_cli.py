"""Command line: outputs, exit codes and argument parsing."""

import json
import math

import pytest

from harness import reports
from harness.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, _period, build_parser, main

EXPERIMENT = """seed = 4
[system]
builtin = "sys1"
[sampling]
n_traj = 30
n_snap = 4
[[dictionary]]
m = 1
[grid]
values = [0.5, 1.1]
"""


def test_critical_period(tmp_path, capsys):
    code = main(["--out-dir", str(tmp_path), "critical-period", "--system", "sys2", "--T-s", "1.1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "T_gamma = 1.0471975512" in out
    assert "aliasing possible" in out
    summary = json.loads((tmp_path / "critical-period" / "summary.json").read_text())
    assert summary["min_frequency"] == pytest.approx(6.0)


def test_critical_period_unbounded(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "critical-period", "--system", "sys4"]) == EXIT_OK
    assert "T_gamma = inf" in capsys.readouterr().out


def test_unknown_system_is_config_error(tmp_path):
    assert main(["--out-dir", str(tmp_path), "critical-period", "--system", "sys9"]) == EXIT_CONFIG


def test_non_invariant_dictionary_is_numeric_failure(tmp_path):
    code = main(["--out-dir", str(tmp_path), "critical-period", "--system", "sys4", "--dictionary-degree", "1"])
    assert code == EXIT_NUMERIC


def test_sweep_needs_seed(tmp_path):
    assert main(["--out-dir", str(tmp_path), "sweep", "--system", "sys1"]) == EXIT_CONFIG


def test_sweep_from_config(tmp_path):
    config = tmp_path / "sys1.toml"
    config.write_text(EXPERIMENT)
    code = main(["--out-dir", str(tmp_path / "out"), "--jobs", "1", "sweep", "--config", str(config)])
    assert code == EXIT_OK
    rows = reports.read_csv(tmp_path / "out" / "sweep" / "sweep.csv")
    assert [row["T_s"] for row in rows] == ["0.5", "1.1"]
    assert rows[0]["status"] == "ok"
    assert rows[1]["beyond_critical"] == "true"


def test_config_line_error(tmp_path, capsys):
    config = tmp_path / "broken.toml"
    config.write_text(EXPERIMENT.replace("m = 1", "m = -1"))
    assert main(["--out-dir", str(tmp_path), "sweep", "--config", str(config)]) == EXIT_CONFIG
    assert "line 8" in capsys.readouterr().err


def test_alias_demo(tmp_path, capsys):
    code = main(["--out-dir", str(tmp_path), "alias-demo", "--T-s", "4*pi/9", "--photos", "5"])
    assert code == EXIT_OK
    assert "alias angular velocity -1.5" in capsys.readouterr().out
    assert len(reports.read_csv(tmp_path / "alias-demo" / "samples.csv")) == 5


def test_simulate_divergence_is_numeric_failure(tmp_path):
    system = tmp_path / "blowup.toml"
    system.write_text('[system]\nname = "blowup"\ndim = 1\n'
                      '[[system.poly]]\ncomponent = 1\ncoef = 1.0\nexponents = [2]\n')
    code = main(["--out-dir", str(tmp_path), "simulate", "--system-file", str(system),
                 "--x0", "1.0", "--horizon", "2.0"])
    assert code == EXIT_NUMERIC


def test_simulate(tmp_path):
    code = main(["--out-dir", str(tmp_path), "simulate", "--system", "rod", "--param", "omega=2",
                 "--horizon", "1", "--rate", "10"])
    assert code == EXIT_OK
    assert len(reports.read_csv(tmp_path / "simulate" / "trajectory.csv")) == 11


def test_bad_param_is_config_error(tmp_path):
    assert main(["--out-dir", str(tmp_path), "simulate", "--system", "rod", "--param", "omega"]) == EXIT_CONFIG


def test_missing_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


@pytest.mark.parametrize("text, value", [
    ("1.1", 1.1),
    ("pi/3", math.pi / 3),
    ("4*pi/9", 4 * math.pi / 9),
    ("2*pi", 2 * math.pi),
])
def test_period_expressions(text, value):
    assert _period(text) == pytest.approx(value)
