import copy
import dataclasses
import inspect
import math
import os
from pathlib import Path
from typing import Any, Dict, Union

import tomlkit
from tomlkit import document, table
from tomlkit.exceptions import ParseError

from homoglab.exceptions import ConfigInvalid
from homoglab.lab import Settings, init

DEFAULT_OUTPUT_DIR = "homoglab-out"
CONFIG_FILE_NAME = "config.toml"

TOP_LEVEL_KEYS = ("scenario", "output_dir", "jobs")
TABLES = ("coefficient", "domain", "grid", "exponents", "eps", "source", "solver", "params")
# tables whose keys depend on their "type" and are checked by the builders
TYPED_TABLES = ("coefficient", "domain", "source")
SOLVER_KEYS = ("tolerance", "averaging", "max_iterations")


@dataclasses.dataclass
class ScenarioConfig:
    scenario: str
    output_dir: str = DEFAULT_OUTPUT_DIR
    jobs: int = 1
    coefficient: Dict[str, Any] = dataclasses.field(default_factory=dict)
    domain: Dict[str, Any] = dataclasses.field(default_factory=dict)
    grid: Dict[str, Any] = dataclasses.field(default_factory=dict)
    exponents: Dict[str, Any] = dataclasses.field(default_factory=dict)
    eps: Dict[str, Any] = dataclasses.field(default_factory=dict)
    source: Dict[str, Any] = dataclasses.field(default_factory=dict)
    solver: Dict[str, Any] = dataclasses.field(default_factory=dict)
    params: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @staticmethod
    def from_dict(config_dict, **overrides) -> "ScenarioConfig":
        """Compile the config from the various sources.

        Arguments:
            config_dict:
                Dictionary of configuration values that come from the
                scenario file.
            **overrides:
                These values take precedence over any others.
                Typically, they come from the command line arguments.

        Values are taken from 4 places. If a value is present in several, the
        value with the highest precedence will be used. The order of precedence is
        as follows (low to high):
        1. Scenario defaults (see `ScenarioConfig.resolve`)
        2. Config file
        3. Environment variables
        4. Command line arguments
        """
        unknown = sorted(set(config_dict) - set(TOP_LEVEL_KEYS) - set(TABLES))
        if unknown:
            raise ConfigInvalid(f"unknown key(s) {', '.join(unknown)}", key=unknown[0])
        scenario = overrides.get("scenario") or config_dict.get("scenario")
        if not scenario:
            raise ConfigInvalid("no scenario given", key="scenario")
        tables = {}
        for name in TABLES:
            value = config_dict.get(name, {})
            if not isinstance(value, dict):
                raise ConfigInvalid("must be a table", key=name)
            tables[name] = copy.deepcopy(value)
        return ScenarioConfig(
            scenario=str(scenario),
            output_dir=str(
                overrides.get("output_dir") or _from_env("OUT", config_dict.get("output_dir")) or DEFAULT_OUTPUT_DIR
            ),
            jobs=_positive_int(overrides.get("jobs") or _from_env("JOBS", config_dict.get("jobs")) or 1, "jobs"),
            **tables,
        )

    def resolve(self, defaults: Dict[str, Dict[str, Any]]) -> "ScenarioConfig":
        """Overlay this config on a scenario's default tables.

        Keys the scenario does not declare are rejected, except in typed tables, where changing ``type``
        replaces the whole default table and the builder checks the keys.
        """
        tables = {}
        for name in TABLES:
            given = getattr(self, name)
            if name not in defaults and name != "solver":
                if given:
                    raise ConfigInvalid(f"scenario '{self.scenario}' does not use this table", key=name)
                tables[name] = {}
                continue
            base = copy.deepcopy(defaults.get(name, {}))
            if name == "solver":
                _reject_unknown(name, given, SOLVER_KEYS)
            elif name in TYPED_TABLES:
                if "type" in given and given["type"] != base.get("type"):
                    base = {}
            else:
                _reject_unknown(name, given, base)
            base.update(copy.deepcopy(given))
            tables[name] = base
        _check_ranges(tables)
        return dataclasses.replace(self, **tables)

    def init_settings(self) -> Settings:
        return init(
            tolerance=self.solver.get("tolerance"),
            averaging=self.solver.get("averaging"),
            jobs=self.jobs,
            max_iterations=self.solver.get("max_iterations"),
        )

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def __str__(self):
        tables = ", ".join(name for name in TABLES if getattr(self, name)) or "-"
        return inspect.cleandoc(
            f"""
            Scenario: {self.scenario}
            Output directory: {self.output_dir}
            Jobs: {self.jobs}
            Tables: {tables}
            """
        )


def _from_env(name, default=None, prefix="HOMOGLAB_"):
    return os.environ.get(f"{prefix}{name}", default)


def _positive_int(value, key: str) -> int:
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"must be an integer, got {value!r}", key=key)
    if number < 1:
        raise ConfigInvalid(f"must be >= 1, got {number}", key=key)
    return number


def _reject_unknown(name: str, given: Dict[str, Any], allowed):
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigInvalid(f"unknown key(s) {', '.join(unknown)}", key=f"{name}.{unknown[0]}")


def _numbers(value):
    return value if isinstance(value, list) else [value]


def _check_ranges(tables: Dict[str, Dict[str, Any]]):
    for name, values in tables.items():
        for key, value in values.items():
            if key.endswith("cells_per_unit") or key == "cell_resolution":
                for number in _numbers(value):
                    if not isinstance(number, int) or number < 2:
                        raise ConfigInvalid(f"must be an integer >= 2, got {number!r}", key=f"{name}.{key}")
    tolerance = tables["solver"].get("tolerance")
    if tolerance is not None and not 0 < float(tolerance) <= 1e-2:
        raise ConfigInvalid(f"must be in (0, 1e-2], got {tolerance}", key="solver.tolerance")
    for value in _numbers(tables["eps"].get("values", [])):
        if not isinstance(value, (int, float)) or not 0 < value <= 1:
            raise ConfigInvalid(f"must be in ]0, 1], got {value!r}", key="eps.values")
    for value in _numbers(tables["eps"].get("n", [])):
        if not isinstance(value, int) or value < 0:
            raise ConfigInvalid(f"subsequence indices must be integers >= 0, got {value!r}", key="eps.n")
    for key, value in tables["exponents"].items():
        if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
            raise ConfigInvalid(f"must be a positive number, got {value!r}", key=f"exponents.{key}")


def load_config(path: Union[str, Path], **overrides) -> ScenarioConfig:
    """Read a TOML scenario file. See `ScenarioConfig.from_dict` for details about precedence."""
    path = Path(path)
    try:
        with path.open("rt", encoding="utf-8") as fp:
            raw_config = tomlkit.load(fp)
    except OSError as e:
        raise ConfigInvalid(f"cannot read {path}: {e.strerror}", key="config")
    except ParseError as e:
        raise ConfigInvalid(f"{path}: {e}", key="config")
    return ScenarioConfig.from_dict(raw_config.unwrap(), **overrides)


def _toml_table(values: Dict[str, Any]):
    result = table()
    for key, value in values.items():
        if value is None:
            continue
        if isinstance(value, dict):
            result.add(key, _toml_table(value))
        else:
            result.add(key, list(value) if isinstance(value, tuple) else value)
    return result


def _document(config: ScenarioConfig):
    doc = document()

    doc.add("scenario", config.scenario)
    doc.add("output_dir", config.output_dir)
    doc.add("jobs", config.jobs)
    for name in TABLES:
        values = getattr(config, name)
        if values:
            doc.add(name, _toml_table(values))
    return doc


def dumps_config(config: ScenarioConfig) -> str:
    return tomlkit.dumps(_document(config))


def write_config(config: ScenarioConfig, directory: Union[str, Path]) -> Path:
    config_path = Path(directory) / CONFIG_FILE_NAME
    if not config_path.parent.exists():
        config_path.parent.mkdir(parents=True)
    with config_path.open("wt", encoding="utf-8") as fp:
        tomlkit.dump(_document(config), fp)

    return config_path
