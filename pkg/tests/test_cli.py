import json
import os
import sys
from pathlib import Path
from unittest import mock

import pytest
import tomlkit
from typer.testing import CliRunner

from homoglab import __version__
from homoglab.cli_main import app

runner = CliRunner()


@pytest.fixture(autouse=True)
def mock_env():
    with mock.patch.dict(os.environ, {}, clear=True):
        yield


def _error(result):
    # the JSON error is the first line on stdout; the human-readable message follows on stderr
    return json.loads(result.output.splitlines()[0])


def test_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_list_csv():
    result = runner.invoke(app, ["list", "counter", "--format", "csv"])
    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "name,description"
    assert [line.split(",")[0] for line in lines[1:]] == ["counterexample-1d", "counterexample-2d"]


def test_list_json():
    result = runner.invoke(app, ["list", "-f", "json"])
    assert result.exit_code == 0, result.output
    names = [entry["name"] for entry in json.loads(result.stdout)]
    assert len(names) == 10
    assert "rate-sweep-1d" in names


def test_list_pretty():
    result = runner.invoke(app, ["list", "laminate"])
    assert result.exit_code == 0, result.output
    assert "laminate-2d" in result.stdout
    assert "harmonic-1d" not in result.stdout


def test_describe_is_valid_toml():
    result = runner.invoke(app, ["describe", "rate-sweep-1d"])
    assert result.exit_code == 0, result.output
    doc = tomlkit.parse(result.stdout).unwrap()
    assert doc["scenario"] == "rate-sweep-1d"
    assert doc["exponents"] == {"p": 0.4, "alpha": 0.5, "r": 2.0}


def test_describe_json():
    result = runner.invoke(app, ["describe", "laminate-2d", "-f", "json"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["name"] == "laminate-2d"
    assert payload["defaults"]["grid"] == {"cells_per_unit": 128}


def test_describe_unknown():
    result = runner.invoke(app, ["describe", "nope"])
    assert result.exit_code == 2
    error = _error(result)
    assert error["error"] == "ScenarioUnknown"
    assert "harmonic-1d" in error["registry"]


def _write_config(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def test_run_config_file(tmp_path):
    out = tmp_path / "results"
    config = _write_config(
        tmp_path / "harmonic.toml",
        'scenario = "harmonic-1d"\n\n[coefficient]\ntype = "laminate"\n\n[grid]\ncells_per_unit = 16\n',
    )
    result = runner.invoke(app, ["--out", str(out), "run", str(config), "--format", "json"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["scenario"] == "harmonic-1d"
    assert payload["files"] == ["config.toml", "corrector.csv", "summary.json"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["results"]["harmonic_mean"] == pytest.approx(1.5)


def test_run_env_output_dir(tmp_path):
    out = tmp_path / "from-env"
    config = _write_config(tmp_path / "c.toml", 'scenario = "harmonic-1d"\n\n[grid]\ncells_per_unit = 16\n')
    with mock.patch.dict(os.environ, {"HOMOGLAB_OUT": str(out)}):
        result = runner.invoke(app, ["run", str(config), "-f", "csv"])
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[0] == "scenario,file"
    assert (out / "summary.json").exists()


def test_run_cli_trumps_env(tmp_path):
    with mock.patch.dict(os.environ, {"HOMOGLAB_OUT": str(tmp_path / "env"), "HOMOGLAB_JOBS": "2"}):
        config = _write_config(tmp_path / "c.toml", 'scenario = "laminate-2d"\n\n[grid]\ncells_per_unit = 8\n')
        result = runner.invoke(app, ["-o", str(tmp_path / "cli"), "-j", "3", "run", str(config), "-f", "json"])
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "cli" / "summary.json").read_text())
    assert summary["settings"]["jobs"] == 3
    assert not (tmp_path / "env").exists()


def test_run_scenario_name(tmp_path):
    result = runner.invoke(app, ["-o", str(tmp_path), "run", "harmonic-1d"])
    assert result.exit_code == 0, result.output
    assert "Reports written to" in result.stdout
    assert (tmp_path / "corrector.csv").exists()


def test_run_unknown_key(tmp_path):
    config = _write_config(tmp_path / "c.toml", 'scenario = "harmonic-1d"\n\n[grid]\nhalf_width = 4\n')
    result = runner.invoke(app, ["-o", str(tmp_path / "out"), "run", str(config)])
    assert result.exit_code == 2
    assert _error(result) == {
        "error": "ConfigInvalid",
        "key": "grid.half_width",
        "message": "grid.half_width: unknown key(s) half_width",
        "module": None,
    }


def test_run_missing_file(tmp_path):
    result = runner.invoke(app, ["run", str(tmp_path / "missing.toml")])
    assert result.exit_code == 2
    assert _error(result)["key"] == "config"


def test_run_unknown_scenario(tmp_path):
    result = runner.invoke(app, ["-o", str(tmp_path), "run", "nope"])
    assert result.exit_code == 2
    assert _error(result)["error"] == "ScenarioUnknown"


def test_run_numerical_failure(tmp_path):
    config = _write_config(
        tmp_path / "c.toml",
        'scenario = "harmonic-1d"\n\n[grid]\ncells_per_unit = 64\n\n[solver]\nmax_iterations = 1\n',
    )
    result = runner.invoke(app, ["-o", str(tmp_path / "out"), "run", str(config)])
    assert result.exit_code == 3
    error = _error(result)
    assert error["error"] == "NoConvergence"
    assert error["module"] == "elliptic_solver"


def test_run_output_dir_not_writable(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    result = runner.invoke(app, ["-o", str(blocker / "sub"), "run", "harmonic-1d", "-f", "json"])
    assert result.exit_code == 2
    error = _error(result)
    assert error["error"] == "ConfigInvalid"
    assert error["key"] == "output_dir"


def test_run_unexpected_error(tmp_path):
    # homoglab.cli re-exports the `run` function, which shadows the submodule attribute
    run_module = sys.modules["homoglab.cli.run"]
    with mock.patch.object(run_module, "run_scenario", side_effect=RuntimeError("boom")):
        result = runner.invoke(app, ["-o", str(tmp_path), "run", "harmonic-1d"])
    assert result.exit_code == 3
    assert _error(result) == {"error": "RuntimeError", "message": "boom", "module": None}
