"""Bounded domains Ω and right-hand sides f of the ε-problem -div(a(x/ε)∇u) = f, u = 0 on ∂Ω.

Domains are meshed on the lattice-aligned grid of their bounding box; the annulus keeps the cells whose centers
satisfy r_in < |x| < r_out, so its boundary is a staircase of cell faces.
"""
import logging
import math
import warnings
from typing import Any, ClassVar, Dict, Optional, Tuple

import attrs
import numpy as np
from scipy import ndimage

from homoglab.exceptions import ConfigInvalid, DisconnectedWarning, DomainTooSmall
from homoglab.grid_fields import TWO_PI, Grid

log = logging.getLogger("homoglab")


def _floats(value) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(value))


class Domain:
    type: ClassVar[str]
    dim: ClassVar[int]

    def grid(self, cells_per_unit: int) -> Grid:
        raise NotImplementedError

    def mask(self, grid: Grid) -> Optional[np.ndarray]:
        return None

    def interior_mask(self, grid: Grid) -> np.ndarray:
        """Cells of the interior window Ω₁ ⊂⊂ Ω."""
        raise NotImplementedError

    def poincare_constant(self, h: float) -> float:
        raise NotImplementedError

    def to_config(self) -> Dict[str, Any]:
        table = {"type": self.type}
        for field in attrs.fields(type(self)):
            value = getattr(self, field.name)
            table[field.name] = list(value) if isinstance(value, tuple) else value
        return table


@attrs.frozen
class Interval(Domain):
    type = "interval"
    dim = 1

    lower: float = attrs.field(default=0.0, converter=float)
    upper: float = attrs.field(default=1.0, converter=float)

    def __attrs_post_init__(self):
        if not self.upper > self.lower:
            raise ConfigInvalid(f"empty interval ({self.lower}, {self.upper})", key="domain")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def grid(self, cells_per_unit: int) -> Grid:
        return Grid.box([self.lower], [self.upper], cells_per_unit)

    def interior_mask(self, grid: Grid) -> np.ndarray:
        x = grid.centers()[..., 0]
        inset = self.length / 4
        return (x >= self.lower + inset) & (x <= self.upper - inset)

    def poincare_constant(self, h: float) -> float:
        return self.length / math.pi


@attrs.frozen
class Box(Domain):
    type = "box"
    dim = 2

    lower: Tuple[float, ...] = attrs.field(default=(0.0, 0.0), converter=_floats)
    upper: Tuple[float, ...] = attrs.field(default=(1.0, 1.0), converter=_floats)

    def __attrs_post_init__(self):
        if len(self.lower) != 2 or len(self.upper) != 2:
            raise ConfigInvalid("box corners need two coordinates", key="domain")
        if any(u <= l for l, u in zip(self.lower, self.upper)):
            raise ConfigInvalid(f"empty box {self.lower}..{self.upper}", key="domain")

    @property
    def sides(self) -> Tuple[float, ...]:
        return tuple(u - l for l, u in zip(self.lower, self.upper))

    def grid(self, cells_per_unit: int) -> Grid:
        return Grid.box(self.lower, self.upper, cells_per_unit)

    def interior_mask(self, grid: Grid) -> np.ndarray:
        inset = math.hypot(*self.sides) / 4
        if 2 * inset >= min(self.sides):
            raise DomainTooSmall(f"box {self.lower}..{self.upper} has no interior window at distance diam/4")
        centers = grid.centers()
        inside = np.ones(grid.cells, dtype=bool)
        for axis in range(2):
            x = centers[..., axis]
            inside &= (x >= self.lower[axis] + inset) & (x <= self.upper[axis] - inset)
        return inside

    def poincare_constant(self, h: float) -> float:
        return min(self.sides) / math.pi


@attrs.frozen
class Annulus(Domain):
    type = "annulus"
    dim = 2

    inner: float = attrs.field(default=1.0, converter=float)
    outer: float = attrs.field(default=2.0, converter=float)

    def __attrs_post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ConfigInvalid(
                f"annulus radii must satisfy 0 <= inner < outer, got {self.inner}, {self.outer}", key="domain"
            )

    def grid(self, cells_per_unit: int) -> Grid:
        # round the bounding box out to whole units so the grid stays lattice aligned
        half = math.ceil(self.outer)
        return Grid.centered(half, 2, cells_per_unit)

    def mask(self, grid: Grid) -> np.ndarray:
        r = grid.radii()
        active = (r > self.inner) & (r < self.outer)
        _, components = ndimage.label(active)
        if components != 1:
            message = f"annulus mask at {grid.cells_per_unit} cells per unit has {components} components"
            log.warning(message)
            warnings.warn(message, DisconnectedWarning, stacklevel=2)
        return active

    def interior_mask(self, grid: Grid) -> np.ndarray:
        r = grid.radii()
        inset = (self.outer - self.inner) / 4
        return (r >= self.inner + inset) & (r <= self.outer - inset)

    def poincare_constant(self, h: float) -> float:
        return math.sqrt(2) * (self.outer - self.inner + 2 * h) / math.pi


class Source:
    type: ClassVar[str]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def primitive(self, x: np.ndarray, start: float) -> np.ndarray:
        """F(x) = ∫_start^x f in one dimension."""
        raise NotImplementedError

    def to_config(self) -> Dict[str, Any]:
        return {"type": self.type, **attrs.asdict(self)}


@attrs.frozen
class ConstantSource(Source):
    type = "constant"

    value: float = attrs.field(default=1.0, converter=float)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        return np.full(points.shape[:-1], self.value)

    def primitive(self, x, start):
        return self.value * (np.asarray(x, dtype=float) - start)


@attrs.frozen
class SineSource(Source):
    """amplitude · sin(2π·frequency·x_axis)."""

    type = "sine"

    amplitude: float = attrs.field(default=1.0, converter=float)
    frequency: int = attrs.field(default=1, converter=int)
    axis: int = attrs.field(default=0, converter=int)

    def __attrs_post_init__(self):
        if self.frequency == 0:
            raise ConfigInvalid("frequency must be non-zero", key="source.frequency")

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        return self.amplitude * np.sin(TWO_PI * self.frequency * points[..., self.axis])

    def primitive(self, x, start):
        k = TWO_PI * self.frequency
        return self.amplitude * (math.cos(k * start) - np.cos(k * np.asarray(x, dtype=float))) / k


DOMAINS = [Interval, Box, Annulus]
SOURCES = [ConstantSource, SineSource]
DOMAIN_BY_TYPE = {cls.type: cls for cls in DOMAINS}
SOURCE_BY_TYPE = {cls.type: cls for cls in SOURCES}


def _build(registry: Dict[str, type], table: Dict[str, Any], what: str):
    table = dict(table)
    type_ = table.pop("type", None)
    if type_ not in registry:
        known = ", ".join(sorted(registry))
        raise ConfigInvalid(f"unknown {what} type '{type_}' (known: {known})", key=f"{what}.type")
    names = {field.name for field in attrs.fields(registry[type_])}
    unknown = sorted(set(table) - names)
    if unknown:
        raise ConfigInvalid(f"unknown key(s) {', '.join(unknown)} for type '{type_}'", key=what)
    return registry[type_](**table)


def domain_from_config(table: Dict[str, Any]) -> Domain:
    return _build(DOMAIN_BY_TYPE, table, "domain")


def source_from_config(table: Dict[str, Any]) -> Source:
    return _build(SOURCE_BY_TYPE, table, "source")


def default_domain(dim: int) -> Domain:
    return Interval() if dim == 1 else Box()


def masked_values(values: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    return values if mask is None else np.where(mask, values, 0.0)


def l2_on(values: np.ndarray, grid: Grid, mask: Optional[np.ndarray] = None) -> float:
    """Midpoint-rule L² norm of cell samples (vector samples use the Euclidean norm), restricted to ``mask``."""
    values = np.asarray(values, dtype=float)
    squares = values**2
    if squares.ndim > grid.dim:
        squares = np.sum(squares, axis=tuple(range(grid.dim, squares.ndim)))
    if mask is not None:
        squares = np.where(mask, squares, 0.0)
    return math.sqrt(float(np.sum(squares)) * grid.cell_volume)

