"""Experiment configuration: TOML schema, presets, grids and overrides."""

import pytest

from harness.config import (
    DictionarySpec,
    apply_overrides,
    experiment_from_mapping,
    load_experiment,
    make_grid,
    preset_config,
    validate_grid,
)
from config.loader import parse_toml
from koopman.errors import ConfigError, UnknownSystem

BASIC = """seed = 3
[system]
builtin = "sys1"
[sampling]
n_traj = 20
n_snap = 4
[[dictionary]]
m = 1
[grid]
values = [0.5, 1.1]
"""


def _config(text, overrides=None):
    return experiment_from_mapping(parse_toml(text), text, overrides)


class TestGrid:
    def test_default_grid(self):
        grid = make_grid(0.05, 2.8, 0.05)
        assert len(grid) == 56
        assert grid[0] == 0.05
        assert grid[-1] == 2.8
        assert 1.1 in grid

    def test_tenth_steps_are_exact(self):
        grid = make_grid(0.1, 2.8, 0.1)
        assert grid[:3] == (0.1, 0.2, 0.3)
        assert len(grid) == 28

    @pytest.mark.parametrize("grid", [(), (0.5, 0.5), (1.0, 0.5), (0.0, 1.0), (float("inf"),)])
    def test_invalid(self, grid):
        with pytest.raises(ConfigError):
            validate_grid(grid)

    def test_nonpositive_step(self):
        with pytest.raises(ConfigError):
            make_grid(0.1, 1.0, 0.0)


class TestMapping:
    def test_basic(self):
        config = _config(BASIC)
        assert config.system.name == "linear-spiral"
        assert config.n_traj == 20
        assert config.grid == (0.5, 1.1)
        assert config.init_box == ((-1.0, 1.0), (-1.0, 1.0))
        assert config.x0 == (0.5, 0.5)
        assert config.horizon == 5.0
        assert [d.label for d in config.built_dictionaries()] == ["m=1"]

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed"):
            _config(BASIC.replace("seed = 3\n", ""))

    def test_seed_override(self):
        config = _config(BASIC.replace("seed = 3\n", ""), {"seed": 9})
        assert config.seed == 9

    def test_bad_degree_line(self):
        with pytest.raises(ConfigError) as excinfo:
            _config(BASIC.replace("m = 1", "m = 0"))
        assert excinfo.value.line == 8

    def test_unknown_builtin_line(self):
        with pytest.raises(UnknownSystem) as excinfo:
            _config(BASIC.replace('"sys1"', '"sys9"'))
        assert excinfo.value.line == 3

    def test_decreasing_values_line(self):
        with pytest.raises(ConfigError) as excinfo:
            _config(BASIC.replace("[0.5, 1.1]", "[1.1, 0.5]"))
        assert excinfo.value.line == 10

    def test_custom_basis_and_rationals(self):
        text = BASIC.replace("m = 1", 'basis = ["x1", "x2", "x1^2"]') + "[[dictionary]]\nm = 1\nP = 2\n"
        dictionaries = _config(text).built_dictionaries()
        assert dictionaries[0].labels == ["x1", "x2", "x1^2"]
        assert len(dictionaries[1]) == 10

    def test_start_stop_step(self):
        text = BASIC.replace("values = [0.5, 1.1]", "start = 0.1\nstop = 0.5\nstep = 0.1")
        assert _config(text).grid == (0.1, 0.2, 0.3, 0.4, 0.5)

    def test_system_file_relative_to_config(self, tmp_path):
        (tmp_path / "decay.toml").write_text(
            '[system]\nname = "decay"\ndim = 1\n'
            '[[system.poly]]\ncomponent = 1\ncoef = -1.0\nexponents = [1]\n'
        )
        path = tmp_path / "experiment.toml"
        path.write_text(
            'seed = 1\n[system]\nfile = "decay.toml"\n[sampling]\ninit_box = [[-1.0, 1.0]]\n'
            '[[dictionary]]\nm = 1\n[grid]\nvalues = [0.5]\n[prediction]\nx0 = [0.5]\n'
        )
        config = load_experiment(path)
        assert config.system.name == "decay"
        assert config.x0 == (0.5,)

    def test_round_trip_to_dict(self):
        data = _config(BASIC).to_dict()
        assert data["seed"] == 3
        assert data["dictionaries"] == [{"m": 1, "include_constant": False}]


class TestPresets:
    def test_fixed_point_cubic(self):
        config = preset_config("sys2", seed=5)
        assert [spec.m for spec in config.dictionaries] == [7, 10, 13]
        assert (config.n_traj, config.n_snap) == (1000, 30)
        assert config.grid[-1] == 2.8

    def test_rational_stops_earlier(self):
        config = preset_config("sys5", seed=5)
        assert config.grid[-1] == 2.1
        assert config.dictionaries[0] == DictionarySpec(m=1, P=2)

    def test_limit_cycle_box(self):
        assert preset_config("sys3", seed=5).init_box == ((-1.5, 1.5), (-1.5, 1.5))

    def test_seed_required(self):
        with pytest.raises(ConfigError):
            preset_config("sys1", seed=None)

    def test_overrides(self):
        config = apply_overrides(preset_config("sys1", seed=5), {"n_traj": 10, "grid": [0.5, 1.1], "seed": None})
        assert config.n_traj == 10
        assert config.grid == (0.5, 1.1)
        assert config.seed == 5
