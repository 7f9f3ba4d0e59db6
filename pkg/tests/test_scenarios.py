import json
import os
from unittest import mock

import pytest

import homoglab
from homoglab.config import ScenarioConfig, load_config
from homoglab.exceptions import ConfigInvalid, ScenarioUnknown
from homoglab.lab import Lab
from homoglab.scenarios import REGISTRY, get_scenario, list_scenarios, run_scenario

SCENARIOS = [
    "cesaro-extract",
    "counterexample-1d",
    "counterexample-2d",
    "decay-suite",
    "defect-corrector",
    "fixed-point",
    "gns-suite",
    "harmonic-1d",
    "laminate-2d",
    "rate-sweep-1d",
]


@pytest.fixture(autouse=True)
def clean_env():
    with mock.patch.dict(os.environ, {}, clear=True):
        yield


def test_registry():
    assert sorted(REGISTRY) == SCENARIOS
    assert [s.name for s in list_scenarios()] == SCENARIOS
    assert [s.name for s in list_scenarios("COUNTER")] == ["counterexample-1d", "counterexample-2d"]
    assert list_scenarios("nothing") == []


def test_get_scenario_unknown():
    with pytest.raises(ScenarioUnknown) as e:
        get_scenario("laminate")
    assert e.value.registry == SCENARIOS
    assert "Known scenarios: cesaro-extract" in str(e.value)


@pytest.mark.parametrize("name", SCENARIOS)
def test_default_configs_resolve(name):
    config = get_scenario(name).default_config()
    assert config.scenario == name


def _config(name, out_dir, **tables):
    return ScenarioConfig.from_dict({"scenario": name, **tables}, output_dir=str(out_dir))


def test_run_harmonic_laminate(out_dir):
    config = _config(
        "harmonic-1d",
        out_dir,
        coefficient={"type": "laminate"},
        grid={"cells_per_unit": 32},
        solver={"tolerance": 1e-12},
    )
    outcome = run_scenario(config)

    assert outcome.directory == out_dir
    assert sorted(p.name for p in outcome.files) == ["config.toml", "corrector.csv", "summary.json"]
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["scenario"] == "harmonic-1d"
    assert summary["version"] == homoglab.__version__
    assert summary["settings"]["tolerance"] == 1e-12
    assert summary["scope"] == {"scenario": "harmonic-1d"}
    assert summary["results"]["harmonic_mean"] == pytest.approx(1.5)
    assert summary["results"]["error"] < 1e-9
    assert summary["results"]["a_star"]["cells_per_unit"] == 32
    assert len((out_dir / "corrector.csv").read_text().splitlines()) == 33


def test_run_restores_settings(out_dir):
    previous = Lab.current.settings
    run_scenario(_config("harmonic-1d", out_dir, grid={"cells_per_unit": 16}, solver={"averaging": "arithmetic"}))
    assert Lab.current.settings is previous


def test_run_embeds_scope(out_dir):
    with homoglab.current_scope() as scope:
        scope["study"] = "laminate contrast"
        outcome = run_scenario(_config("laminate-2d", out_dir, grid={"cells_per_unit": 16}))
    assert outcome.summary["scope"] == {"study": "laminate contrast", "scenario": "laminate-2d"}
    assert outcome.summary["results"]["error"] < 1e-6


def test_run_counterexample_1d(out_dir):
    outcome = run_scenario(
        _config(
            "counterexample-1d",
            out_dir,
            eps={"n": [0, 1]},
            grid={"cells_per_unit": 64},
            params={"phase_family": False},
        )
    )
    assert sorted(p.name for p in outcome.files) == ["config.toml", "distances.dat", "subsequence.csv", "summary.json"]
    assert (out_dir / "subsequence.csv").read_text().splitlines()[0] == "n,distance,deviation"
    assert outcome.summary["results"]["cross_branch_distance"] > 1e-3
    assert "phase_family" not in outcome.summary["results"]


def test_run_writes_resolved_config(out_dir):
    outcome = run_scenario(_config("harmonic-1d", out_dir, grid={"cells_per_unit": 16}))
    reloaded = load_config(out_dir / "config.toml")
    assert reloaded.grid == {"cells_per_unit": 16}
    assert reloaded.coefficient == get_scenario("harmonic-1d").defaults["coefficient"]
    assert outcome.summary["config"]["grid"] == {"cells_per_unit": 16}


def test_run_is_reproducible(out_dir):
    config = _config("harmonic-1d", out_dir, grid={"cells_per_unit": 16})
    first = {p.name: p.read_bytes() for p in run_scenario(config).files}
    second = {p.name: p.read_bytes() for p in run_scenario(config).files}
    assert first == second


@pytest.mark.parametrize(
    "name,tables,key",
    [
        ("laminate-2d", {"coefficient": {"type": "constant", "value": 1.0}}, "coefficient.type"),
        ("harmonic-1d", {"coefficient": {"type": "radial_log_osc"}}, "coefficient.type"),
        ("defect-corrector", {"params": {"direction": 2}}, "params.direction"),
        ("counterexample-2d", {"eps": {"offsets": [0.0]}}, "eps.offsets"),
        ("rate-sweep-1d", {"grid": {"cells_per_unit": 8}}, "grid.cells_per_unit"),
    ],
)
def test_run_config_errors(out_dir, name, tables, key):
    with pytest.raises(ConfigInvalid) as e:
        run_scenario(_config(name, out_dir, **tables))
    assert e.value.key == key


def test_run_unknown_scenario(out_dir):
    with pytest.raises(ScenarioUnknown):
        run_scenario(_config("nope", out_dir))


def test_run_output_dir_is_a_file(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ConfigInvalid) as e:
        run_scenario(_config("harmonic-1d", blocker / "sub"))
    assert e.value.key == "output_dir"
    assert isinstance(e.value.__cause__, OSError)
