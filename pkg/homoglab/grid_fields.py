"""Uniform grids, cell-centered fields and the rescaling parameter ε.

Samples live at cell centers ``origin + (i + 1/2) h`` with ``h = 1 / cells_per_unit``. Every field stores its
values in a read-only numpy array whose leading axes follow the grid's cell counts; vector and matrix fields
carry one or two trailing component axes of length ``dim``.
"""
import logging
import math
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple

import attrs
import numpy as np

from homoglab.decorators import track
from homoglab.exceptions import ConfigInvalid, EllipticityViolation, GridMisaligned, GridTooSmall, NonFinite

log = logging.getLogger("homoglab")

TWO_PI = 2.0 * math.pi

# Origins are multiples of h up to this many cells.
_ALIGN_TOL = 1e-9


def _float_tuple(value) -> Tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),)
    return tuple(float(v) for v in value)


def _int_tuple(value) -> Tuple[int, ...]:
    if np.isscalar(value):
        return (int(value),)
    return tuple(int(v) for v in value)


@attrs.frozen
class Grid:
    """Tensor-product grid of ``cells`` cells starting at ``origin`` with ``cells_per_unit`` cells per unit length."""

    origin: Tuple[float, ...] = attrs.field(converter=_float_tuple)
    cells: Tuple[int, ...] = attrs.field(converter=_int_tuple)
    cells_per_unit: int = attrs.field(converter=int)

    def __attrs_post_init__(self):
        if len(self.origin) not in (1, 2):
            raise GridTooSmall(f"Only dimensions 1 and 2 are supported, got {len(self.origin)}")
        if len(self.cells) != len(self.origin):
            raise GridTooSmall(f"origin has {len(self.origin)} components but cells has {len(self.cells)}")
        if self.cells_per_unit < 2:
            raise GridTooSmall(f"cells_per_unit must be at least 2, got {self.cells_per_unit}")
        if min(self.cells) < 1:
            raise GridTooSmall(f"Every axis needs at least one cell, got {self.cells}")

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], cells_per_unit: int) -> "Grid":
        lower, upper = _float_tuple(lower), _float_tuple(upper)
        cells = []
        for lo, hi in zip(lower, upper):
            count = (hi - lo) * cells_per_unit
            if abs(count - round(count)) > _ALIGN_TOL * max(1.0, abs(count)):
                raise GridMisaligned(f"Box [{lo}, {hi}] is not a whole number of cells at {cells_per_unit} per unit")
            cells.append(int(round(count)))
        return cls(lower, cells, cells_per_unit)

    @classmethod
    def centered(cls, half_width: float, dim: int, cells_per_unit: int) -> "Grid":
        return cls.box([-half_width] * dim, [half_width] * dim, cells_per_unit)

    @classmethod
    def unit_cell(cls, dim: int, cells_per_unit: int) -> "Grid":
        return cls((0.0,) * dim, (cells_per_unit,) * dim, cells_per_unit)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> float:
        return 1.0 / self.cells_per_unit

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def extent(self) -> Tuple[float, ...]:
        return tuple(c * self.h for c in self.cells)

    @property
    def upper(self) -> Tuple[float, ...]:
        return tuple(o + c * self.h for o, c in zip(self.origin, self.cells))

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + (np.arange(self.cells[i]) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``cells + (dim,)``."""
        axes = np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij")
        return np.stack(axes, axis=-1)

    def radii(self) -> np.ndarray:
        return np.sqrt(np.sum(self.centers() ** 2, axis=-1))

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.centers()), axis=-1)

    def lattice_offset(self) -> Tuple[int, ...]:
        """Index of the cell whose lower corner is the origin of space.

        The index may lie outside the grid; raises GridMisaligned when the origin is not a multiple of h.
        """
        offset = []
        for o in self.origin:
            scaled = -o * self.cells_per_unit
            if abs(scaled - round(scaled)) > _ALIGN_TOL * max(1.0, abs(scaled)):
                raise GridMisaligned(f"Grid origin {self.origin} is not a multiple of h = 1/{self.cells_per_unit}")
            offset.append(int(round(scaled)))
        return tuple(offset)

    def covers(self, lower: Sequence[float], upper: Sequence[float]) -> bool:
        tol = _ALIGN_TOL * self.h
        return all(
            o <= lo + tol and hi - tol <= u for o, u, lo, hi in zip(self.origin, self.upper, lower, upper)
        )

    def subgrid(self, start: Sequence[int], cells: Sequence[int]) -> "Grid":
        start = _int_tuple(start)
        return Grid(
            tuple(o + s * self.h for o, s in zip(self.origin, start)), cells, self.cells_per_unit
        )

    def slices(self, start: Sequence[int], cells: Sequence[int]) -> Tuple[slice, ...]:
        return tuple(slice(s, s + c) for s, c in zip(_int_tuple(start), _int_tuple(cells)))

    def block_start(self, lower: Sequence[float]) -> Tuple[int, ...]:
        """Cell index whose lower edge sits at ``lower``."""
        start = []
        for o, lo in zip(self.origin, _float_tuple(lower)):
            scaled = (lo - o) * self.cells_per_unit
            if abs(scaled - round(scaled)) > _ALIGN_TOL * max(1.0, abs(scaled)):
                raise GridMisaligned(f"Point {lo} is not on a cell edge of the grid")
            start.append(int(round(scaled)))
        return tuple(start)

    def to_dict(self) -> Dict[str, Any]:
        return {"origin": list(self.origin), "cells": list(self.cells), "cells_per_unit": self.cells_per_unit}


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.flags.writeable = False
    return array


@attrs.frozen(eq=False)
class _GridFunction:
    grid: Grid
    values: np.ndarray = attrs.field(converter=_readonly)

    #: number of trailing component axes
    rank = 0

    def __attrs_post_init__(self):
        expected = tuple(self.grid.cells) + (self.grid.dim,) * self.rank
        if self.values.shape != expected:
            raise ValueError(f"{type(self).__name__} values have shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise NonFinite(f"{type(self).__name__} contains non-finite values")

    def with_values(self, values):
        return type(self)(self.grid, values)

    def restrict(self, start: Sequence[int], cells: Sequence[int]):
        return type(self)(self.grid.subgrid(start, cells), self.values[self.grid.slices(start, cells)])

    def __add__(self, other):
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


class ScalarField(_GridFunction):
    rank = 0

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.cells))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.cells, float(value)))

    def abs(self) -> "ScalarField":
        return self.with_values(np.abs(self.values))


class VectorField(_GridFunction):
    rank = 1

    @classmethod
    def from_components(cls, components: Iterable[ScalarField]) -> "VectorField":
        components = list(components)
        return cls(components[0].grid, np.stack([c.values for c in components], axis=-1))

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., i])

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt(np.sum(self.values**2, axis=-1)))


class MatrixField(_GridFunction):
    rank = 2

    @staticmethod
    def _symmetric(values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return _readonly(0.5 * (values + np.swapaxes(values, -1, -2)))

    def __attrs_post_init__(self):
        super().__attrs_post_init__()
        if not np.array_equal(self.values, np.swapaxes(self.values, -1, -2)):
            object.__setattr__(self, "values", self._symmetric(self.values))

    @classmethod
    def isotropic(cls, scalar: ScalarField) -> "MatrixField":
        eye = np.eye(scalar.grid.dim)
        return cls(scalar.grid, scalar.values[..., None, None] * eye)

    @classmethod
    def constant(cls, grid: Grid, value) -> "MatrixField":
        matrix = np.asarray(value, dtype=float)
        if matrix.ndim == 0:
            matrix = matrix * np.eye(grid.dim)
        return cls(grid, np.broadcast_to(matrix, tuple(grid.cells) + matrix.shape))

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., i, j])

    def is_diagonal(self) -> bool:
        if self.grid.dim == 1:
            return True
        return not np.any(self.values[..., 0, 1])

    def apply(self, vector: VectorField) -> VectorField:
        return VectorField(self.grid, np.einsum("...ij,...j->...i", self.values, vector.values))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.values)


def _check_same_grid(left, right):
    if left.grid != right.grid:
        raise ValueError(f"Fields live on different grids: {left.grid} and {right.grid}")


def sample_scalar(fn: Callable[[np.ndarray], np.ndarray], grid: Grid) -> ScalarField:
    """Sample a pointwise function of the cell centers (shape ``(..., dim)``)."""
    return ScalarField(grid, np.broadcast_to(fn(grid.centers()), grid.cells))


def periodic_extension(cell_field: _GridFunction, grid: Grid):
    """Extend a field on the unit cell Q to ``grid`` by Q-periodicity."""
    cell_grid = cell_field.grid
    n = cell_grid.cells_per_unit
    if grid.cells_per_unit != n or tuple(cell_grid.cells) != (n,) * cell_grid.dim:
        raise GridMisaligned("Periodic extension needs a unit-cell field at the target resolution")
    if cell_grid.lattice_offset() != (0,) * cell_grid.dim:
        raise GridMisaligned("Periodic extension needs a field sampled on Q = [0, 1)^d")
    offset = grid.lattice_offset()
    index = np.ix_(*[(np.arange(c) - a) % n for c, a in zip(grid.cells, offset)])
    return type(cell_field)(grid, cell_field.values[index])


def unit_cell_block(field: _GridFunction, shift: Sequence[int] = None):
    """Restrict ``field`` to the unit cube Q + shift."""
    grid = field.grid
    n = grid.cells_per_unit
    shift = shift or (0,) * grid.dim
    offset = grid.lattice_offset()
    start = tuple(a + k * n for a, k in zip(offset, shift))
    if any(s < 0 or s + n > c for s, c in zip(start, grid.cells)):
        raise GridTooSmall(f"Grid does not contain the unit cube Q + {tuple(shift)}")
    return field.restrict(start, (n,) * grid.dim)


@attrs.frozen
class EpsDescriptor:
    """The scale parameter ε, stored through the exact parameters that define it.

    Three forms are supported:

    * ``literal``: an explicit ε in ]0, 1].
    * ``exp``: ε = exp(-2πn - y).
    * ``double_exp``: ε = exp(-exp(rate·n + offset)).

    Sequence forms never store ε itself, which underflows for the subsequences of interest. Coefficients
    evaluate a(x/ε) through ``neg_log`` = -ln ε and ``log_neg_log`` = ln(-ln ε); the ``*_phase`` variants drop
    whole turns of 2π exactly so the sine arguments stay small.
    """

    form: str
    neg_log: float
    log_neg_log: float
    neg_log_phase: float
    log_neg_log_phase: float
    params: Dict[str, float] = attrs.field(factory=dict, eq=False)

    @classmethod
    def literal(cls, eps: float) -> "EpsDescriptor":
        eps = float(eps)
        if not 0 < eps <= 1:
            raise ConfigInvalid(f"must be in ]0, 1], got {eps}", key="eps")
        neg_log = -math.log(eps)
        log_neg_log = math.log(neg_log) if neg_log > 0 else -math.inf
        return cls("literal", neg_log, log_neg_log, neg_log, log_neg_log, {"eps": eps})

    @classmethod
    def exp_sequence(cls, n: int, y: float = 0.0) -> "EpsDescriptor":
        if n < 0:
            raise ConfigInvalid(f"subsequence index must be >= 0, got {n}", key="eps.n")
        neg_log = TWO_PI * n + y
        if neg_log < 0:
            raise ConfigInvalid(f"2πn + y must be >= 0, got {neg_log}", key="eps.y")
        log_neg_log = math.log(neg_log) if neg_log > 0 else -math.inf
        return cls("exp", neg_log, log_neg_log, float(y), log_neg_log, {"n": n, "y": float(y)})

    @classmethod
    def double_exp_sequence(cls, n: int, rate: float = TWO_PI, offset: float = 0.0) -> "EpsDescriptor":
        if n < 0:
            raise ConfigInvalid(f"subsequence index must be >= 0, got {n}", key="eps.n")
        log_neg_log = rate * n + offset
        neg_log = math.exp(log_neg_log) if log_neg_log < 709.0 else math.inf
        turns = rate * n / TWO_PI
        if turns == round(turns):
            log_phase = float(offset)
        else:
            log_phase = math.fmod(log_neg_log, TWO_PI)
        neg_log_phase = math.fmod(neg_log, TWO_PI) if math.isfinite(neg_log) else 0.0
        return cls(
            "double_exp",
            neg_log,
            log_neg_log,
            neg_log_phase,
            log_phase,
            {"n": n, "rate": float(rate), "offset": float(offset)},
        )

    @property
    def value(self) -> float:
        """ε as a float. Underflows to 0 for deep subsequence members."""
        return math.exp(-self.neg_log)

    @property
    def is_sequence(self) -> bool:
        return self.form != "literal"

    def to_dict(self) -> Dict[str, Any]:
        return {"form": self.form, **self.params, "neg_log": self.neg_log}

    def __str__(self):
        if self.form == "literal":
            return f"eps={self.params['eps']:g}"
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"eps[{self.form}]({args})"


EPS_ONE = EpsDescriptor.literal(1.0)


def _check_samples(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise NonFinite(f"Evaluation of {what} produced non-finite values")


def _check_floor(field: MatrixField, floor: float):
    lambda_min, _ = check_uniform_ellipticity(field)
    if lambda_min < floor * (1 - 1e-12):
        raise EllipticityViolation(lambda_min, floor)


@track(module="grid_fields")
def sample_field(spec, grid: Grid) -> MatrixField:
    """Sample ``spec`` at the cell centers of ``grid``."""
    values = spec.evaluate(grid.centers())
    _check_samples(values, spec.type)
    field = MatrixField(grid, values)
    _check_floor(field, spec.ellipticity)
    return field


@track(module="grid_fields")
def sample_rescaled(spec, grid: Grid, eps: EpsDescriptor, log_domain: Optional[bool] = None) -> MatrixField:
    """Sample x ↦ spec(x/ε) at the cell centers of ``grid``.

    ``log_domain`` forces (True) or forbids (False) the overflow-free evaluation path; by default it is used for
    sequence descriptors.
    """
    values = spec.evaluate_rescaled(grid.centers(), eps, log_domain=log_domain)
    _check_samples(values, f"{spec.type} at {eps}")
    field = MatrixField(grid, values)
    _check_floor(field, spec.ellipticity)
    return field


@track(module="grid_fields")
def check_uniform_ellipticity(field: MatrixField) -> Tuple[float, float]:
    """Extremal eigenvalues of the coefficient over all cells."""
    eigenvalues = field.eigenvalues()
    return float(eigenvalues.min()), float(eigenvalues.max())
