"""Report persistence: JSON summaries, CSV tables and two-column plot data.

Floats are written with 17 significant digits in CSV and plot files and in shortest round-trip form in JSON, so
re-running a scenario with the same configuration reproduces the files byte for byte. Non-finite values become
``null`` in JSON and ``nan``/``inf`` in CSV.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import attrs
import numpy as np

from homoglab.internal.types import Unset

log = logging.getLogger("homoglab")

FLOAT_FORMAT = "%.17g"


def to_plain(value: Any) -> Any:
    """Convert a report payload to JSON-ready builtins."""
    if hasattr(value, "to_dict"):
        return to_plain(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, Unset):
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_plain(payload), sort_keys=True, allow_nan=False, indent=2) + "\n"


def format_value(value: Any) -> str:
    if value is None or isinstance(value, Unset):
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_json(path: Path, payload: Any) -> Path:
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def write_csv(path: Path, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> Path:
    """One row per dict; columns default to the keys of the first row in insertion order."""
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    with path.open("wt", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
    return path


def write_plot_data(path: Path, x: Iterable[float], y: Iterable[float], log_scale: bool = True) -> Path:
    """Two whitespace-separated columns; with ``log_scale`` the natural logarithms of both.

    Points that have no logarithm are skipped.
    """
    lines = []
    for a, b in zip(x, y):
        if b is None:
            continue
        a, b = float(a), float(b)
        if log_scale:
            if a <= 0 or b <= 0 or not (math.isfinite(a) and math.isfinite(b)):
                continue
            a, b = math.log(a), math.log(b)
        lines.append(f"{FLOAT_FORMAT % a} {FLOAT_FORMAT % b}\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


@attrs.define
class PlotSeries:
    x: List[float]
    y: List[float]
    log_scale: bool = True


@attrs.define
class ScenarioResult:
    """Everything a scenario produces: the JSON summary, CSV tables and plot series, keyed by file stem."""

    summary: Dict[str, Any]
    tables: Dict[str, List[Dict[str, Any]]] = attrs.field(factory=dict)
    plots: Dict[str, PlotSeries] = attrs.field(factory=dict)


@attrs.define
class ReportWriter:
    directory: Path
    written: List[Path] = attrs.field(factory=list)

    def __attrs_post_init__(self):
        self.directory = Path(self.directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _record(self, path: Path) -> Path:
        log.debug("wrote %s", path)
        self.written.append(path)
        return path

    def json(self, name: str, payload: Any) -> Path:
        return self._record(write_json(self.directory / f"{name}.json", payload))

    def csv(self, name: str, rows: Sequence[Dict[str, Any]]) -> Path:
        return self._record(write_csv(self.directory / f"{name}.csv", rows))

    def plot(self, name: str, series: PlotSeries) -> Path:
        return self._record(write_plot_data(self.directory / f"{name}.dat", series.x, series.y, series.log_scale))

    def write_result(self, result: ScenarioResult, summary: Dict[str, Any]) -> List[Path]:
        for name, rows in sorted(result.tables.items()):
            self.csv(name, rows)
        for name, series in sorted(result.plots.items()):
            self.plot(name, series)
        self.json("summary", summary)
        return self.written


def relative(paths: Iterable[Union[str, Path]], root: Path) -> List[str]:
    return sorted(str(Path(p).relative_to(root)) for p in paths)
