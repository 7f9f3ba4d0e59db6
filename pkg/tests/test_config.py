import os
from unittest import mock

import pytest

from homoglab.config import DEFAULT_OUTPUT_DIR, ScenarioConfig, dumps_config, load_config, write_config
from homoglab.exceptions import ConfigInvalid
from homoglab.lab import Lab

DEFAULTS = {
    "coefficient": {"type": "laminate", "values": [1.0, 3.0], "axis": 0},
    "grid": {"cells_per_unit": 8},
    "eps": {"values": [0.5, 0.25]},
    "exponents": {"p": 1.5},
}


@pytest.fixture(autouse=True)
def clean_env():
    with mock.patch.dict(os.environ, {}, clear=True):
        yield


def test_from_dict_defaults():
    config = ScenarioConfig.from_dict({"scenario": "laminate-2d"})
    assert config.scenario == "laminate-2d"
    assert config.output_dir == DEFAULT_OUTPUT_DIR
    assert config.jobs == 1
    assert config.grid == {}


def test_from_dict_file_values():
    config = ScenarioConfig.from_dict({"scenario": "s", "output_dir": "file-out", "jobs": 2})
    assert (config.output_dir, config.jobs) == ("file-out", 2)


@mock.patch.dict(os.environ, {"HOMOGLAB_OUT": "env-out", "HOMOGLAB_JOBS": "3"}, clear=True)
def test_env_trumps_file():
    config = ScenarioConfig.from_dict({"scenario": "s", "output_dir": "file-out", "jobs": 2})
    assert (config.output_dir, config.jobs) == ("env-out", 3)


@mock.patch.dict(os.environ, {"HOMOGLAB_OUT": "env-out", "HOMOGLAB_JOBS": "3"}, clear=True)
def test_overrides_trump_env():
    config = ScenarioConfig.from_dict({"scenario": "s"}, output_dir="cli-out", jobs=4, scenario="other")
    assert (config.scenario, config.output_dir, config.jobs) == ("other", "cli-out", 4)


@pytest.mark.parametrize(
    "config_dict,key",
    [
        ({"scenario": "s", "colour": "red"}, "colour"),
        ({"output_dir": "out"}, "scenario"),
        ({"scenario": "s", "grid": 4}, "grid"),
        ({"scenario": "s", "jobs": "many"}, "jobs"),
    ],
)
def test_from_dict_errors(config_dict, key):
    with pytest.raises(ConfigInvalid) as e:
        ScenarioConfig.from_dict(config_dict)
    assert e.value.key == key


def test_resolve_overlays_defaults():
    config = ScenarioConfig.from_dict({"scenario": "s", "grid": {"cells_per_unit": 16}, "exponents": {"p": 1.2}})
    resolved = config.resolve(DEFAULTS)
    assert resolved.grid == {"cells_per_unit": 16}
    assert resolved.exponents == {"p": 1.2}
    assert resolved.eps == {"values": [0.5, 0.25]}
    assert resolved.coefficient == DEFAULTS["coefficient"]
    assert resolved.source == {}
    # defaults are not shared with the resolved config
    resolved.eps["values"].append(0.125)
    assert DEFAULTS["eps"]["values"] == [0.5, 0.25]


def test_resolve_typed_tables():
    same_type = ScenarioConfig.from_dict({"scenario": "s", "coefficient": {"values": [1.0, 5.0]}})
    assert same_type.resolve(DEFAULTS).coefficient == {"type": "laminate", "values": [1.0, 5.0], "axis": 0}

    new_type = ScenarioConfig.from_dict({"scenario": "s", "coefficient": {"type": "constant", "value": 2.0}})
    assert new_type.resolve(DEFAULTS).coefficient == {"type": "constant", "value": 2.0}


@pytest.mark.parametrize(
    "tables,key",
    [
        ({"grid": {"half_width": 4}}, "grid.half_width"),
        ({"domain": {"type": "interval"}}, "domain"),
        ({"solver": {"precision": 3}}, "solver.precision"),
        ({"grid": {"cells_per_unit": 1}}, "grid.cells_per_unit"),
        ({"solver": {"tolerance": 0.5}}, "solver.tolerance"),
        ({"eps": {"values": [0.5, 2.0]}}, "eps.values"),
        ({"exponents": {"p": -1.0}}, "exponents.p"),
    ],
)
def test_resolve_errors(tables, key):
    config = ScenarioConfig.from_dict({"scenario": "s", **tables})
    with pytest.raises(ConfigInvalid) as e:
        config.resolve(DEFAULTS)
    assert e.value.key == key


def test_resolve_subsequence_indices():
    config = ScenarioConfig.from_dict({"scenario": "s", "eps": {"n": [1, -2]}})
    with pytest.raises(ConfigInvalid) as e:
        config.resolve({"eps": {"n": [1, 2]}})
    assert e.value.key == "eps.n"


def test_init_settings():
    config = ScenarioConfig.from_dict(
        {"scenario": "s", "jobs": 2, "solver": {"tolerance": 1e-8, "averaging": "arithmetic"}}
    ).resolve(DEFAULTS)
    settings = config.init_settings()
    assert Lab.current.settings is settings
    assert (settings.tolerance, settings.averaging, settings.jobs, settings.max_iterations) == (
        1e-8,
        "arithmetic",
        2,
        None,
    )


def test_write_and_load(tmp_path):
    config = ScenarioConfig.from_dict(
        {
            "scenario": "s",
            "output_dir": "out",
            "coefficient": {"type": "perturbed_periodic", "periodic": {"type": "laminate", "values": [1.0, 3.0]}},
            "eps": {"values": [0.5, 0.25]},
        }
    )
    path = write_config(config, tmp_path / "run")
    assert path == tmp_path / "run" / "config.toml"
    assert load_config(path) == config
    assert path.read_text() == dumps_config(config)


def test_load_config_overrides(tmp_path):
    path = tmp_path / "sweep.toml"
    path.write_text('scenario = "rate-sweep-1d"\njobs = 2\n\n[eps]\nvalues = [0.5, 0.25]\n')
    config = load_config(path, jobs=5)
    assert config.scenario == "rate-sweep-1d"
    assert config.jobs == 5
    assert config.eps == {"values": [0.5, 0.25]}


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigInvalid, match="cannot read") as e:
        load_config(tmp_path / "missing.toml")
    assert e.value.key == "config"

    broken = tmp_path / "broken.toml"
    broken.write_text("scenario = \n")
    with pytest.raises(ConfigInvalid) as e:
        load_config(broken)
    assert e.value.key == "config"


def test_str():
    config = ScenarioConfig.from_dict({"scenario": "s", "grid": {"cells_per_unit": 8}})
    assert str(config) == f"Scenario: s\nOutput directory: {DEFAULT_OUTPUT_DIR}\nJobs: 1\nTables: grid"
