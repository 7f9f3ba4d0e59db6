"""CSV and flat binary storage for sampled fields.

CSV layout::

    dim,2
    cells,4,4
    origin,0,0
    h,0.25
    <one row per cell in row-major order, one column per component>

The binary layout is a 32-byte little-endian header followed by the values as little-endian float64 in
row-major order.
"""
import csv
import io
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from homoglab.exceptions import ConfigInvalid, GridMisaligned
from homoglab.grid_fields import Grid, MatrixField, ScalarField, VectorField

log = logging.getLogger("homoglab")

MAGIC = b"HGLF"
HEADER = struct.Struct("<4sBBHIIIii4x")

Field = Union[ScalarField, VectorField, MatrixField]


def _components(field: Field) -> int:
    return int(np.prod(field.values.shape[field.grid.dim :], dtype=int))


def _build(grid: Grid, flat: np.ndarray, components: int) -> Field:
    dim = grid.dim
    if components == 1:
        return ScalarField(grid, flat.reshape(grid.cells))
    if components == dim:
        return VectorField(grid, flat.reshape(tuple(grid.cells) + (dim,)))
    if components == dim * dim:
        return MatrixField(grid, flat.reshape(tuple(grid.cells) + (dim, dim)))
    raise ConfigInvalid(f"{components} components per cell do not match d = {dim}", key="field")


def save_csv(field: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    grid = field.grid
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["dim", grid.dim])
    writer.writerow(["cells", *grid.cells])
    writer.writerow(["origin", *(f"{o:.17g}" for o in grid.origin)])
    writer.writerow(["h", f"{grid.h:.17g}"])
    np.savetxt(buffer, field.values.reshape(grid.size, -1), fmt="%.17g", delimiter=",")
    path.write_text(buffer.getvalue(), encoding="utf-8")
    return path


def load_csv(path: Union[str, Path]) -> Field:
    path = Path(path)
    with path.open("rt", encoding="utf-8") as fp:
        header = [next(fp) for _ in range(4)]
        body = np.loadtxt(fp, delimiter=",", ndmin=2)
    rows = {row[0]: row[1:] for row in csv.reader(header)}
    missing = {"dim", "cells", "origin", "h"} - set(rows)
    if missing:
        raise ConfigInvalid(f"missing header row(s) {', '.join(sorted(missing))}", key=str(path))
    dim = int(rows["dim"][0])
    cells = [int(c) for c in rows["cells"]]
    origin = [float(o) for o in rows["origin"]]
    cells_per_unit = 1.0 / float(rows["h"][0])
    if abs(cells_per_unit - round(cells_per_unit)) > 1e-9 * cells_per_unit:
        raise GridMisaligned(f"h = {rows['h'][0]} is not the inverse of an integer")
    if len(cells) != dim or len(origin) != dim:
        raise ConfigInvalid("header rows disagree on the dimension", key=str(path))
    grid = Grid(origin, cells, int(round(cells_per_unit)))
    if body.shape[0] != grid.size:
        raise ConfigInvalid(f"expected {grid.size} data rows, found {body.shape[0]}", key=str(path))
    return _build(grid, body, body.shape[1])


def save_binary(field: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    grid = field.grid
    offsets = [-a for a in grid.lattice_offset()]
    cells = list(grid.cells) + [1] * (2 - grid.dim)
    offsets = offsets + [0] * (2 - grid.dim)
    header = HEADER.pack(MAGIC, grid.dim, _components(field), 0, cells[0], cells[1], grid.cells_per_unit, *offsets)
    path.write_bytes(header + np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return path


def load_binary(path: Union[str, Path]) -> Field:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise ConfigInvalid("file is shorter than the field header", key=str(path))
    magic, dim, components, _, cells0, cells1, n, origin0, origin1 = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ConfigInvalid(f"bad magic {magic!r}", key=str(path))
    cells = [cells0, cells1][:dim]
    origin = [origin0 / n, origin1 / n][:dim]
    grid = Grid(origin, cells, n)
    flat = np.frombuffer(data, dtype="<f8", offset=HEADER.size)
    if flat.size != grid.size * components:
        raise ConfigInvalid(f"expected {grid.size * components} values, found {flat.size}", key=str(path))
    return _build(grid, flat.astype(float), components)


def save_field(field: Field, path: Union[str, Path]) -> Path:
    if Path(path).suffix == ".csv":
        return save_csv(field, path)
    return save_binary(field, path)


def load_field(path: Union[str, Path]) -> Field:
    if Path(path).suffix == ".csv":
        return load_csv(path)
    return load_binary(path)


def load_matrix_field(path: Union[str, Path]) -> MatrixField:
    """Load a coefficient field; scalar data is read as c·I."""
    field = load_field(path)
    if isinstance(field, ScalarField):
        return MatrixField.isotropic(field)
    if isinstance(field, MatrixField):
        return field
    raise ConfigInvalid("a coefficient field needs 1 or d² components per cell", key=str(path))
