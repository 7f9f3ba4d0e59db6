"""Discrete gradient, local averages and the norms built on them.

The discrete gradient of g is the family of unit translates ``δ_i g = g(· + e_i) - g``; on a grid with n cells per
unit this is a shift by n cells, so component i lives on a grid that is one unit shorter along axis i.

The local average ``M(g)(z) = ∫_{Q+z} g`` is stored edge-aligned: the value at output cell i belongs to the window
whose lower corner is the lower edge of input cell i. The output grid therefore has ``cells - n + 1`` cells per axis
and shares the input grid's origin.
"""
import logging
import math
import warnings
from typing import Callable, List, Optional, Sequence, Tuple, Union

import attrs
import numpy as np

from homoglab.decorators import track
from homoglab.exceptions import (
    DegenerateFitWarning,
    DisconnectedWarning,
    DomainTooSmall,
    ExponentOutOfRange,
    GridMisaligned,
    GridTooSmall,
    IncompatibleField,
    InsufficientRadii,
)
from homoglab.grid_fields import Grid, MatrixField, ScalarField, VectorField, unit_cell_block
from homoglab.internal.models import DecayFit, NormReport

log = logging.getLogger("homoglab")

Field = Union[ScalarField, VectorField, MatrixField]

COMPATIBILITY_TOL = 1e-12


@attrs.frozen(eq=False)
class ShiftedDifferenceField:
    """δf: component i is f(x + e_i) - f(x) on the grid shortened by one unit along axis i."""

    components: Tuple[Field, ...] = attrs.field(converter=tuple)
    source_grid: Grid

    @property
    def dim(self) -> int:
        return self.source_grid.dim

    def overlap_cells(self) -> Tuple[int, ...]:
        n = self.source_grid.cells_per_unit
        return tuple(c - n for c in self.source_grid.cells)

    def overlap_grid(self) -> Grid:
        return self.source_grid.subgrid((0,) * self.dim, self.overlap_cells())

    def overlap_values(self) -> np.ndarray:
        """All components restricted to the common domain, stacked on a trailing axis."""
        cells = self.overlap_cells()
        index = tuple(slice(0, c) for c in cells)
        flat = [c.values[index].reshape(cells + (-1,)) for c in self.components]
        return np.concatenate(flat, axis=-1)

    def magnitude(self) -> ScalarField:
        """Pointwise Euclidean norm |δf| on the overlap domain."""
        return ScalarField(self.overlap_grid(), np.sqrt(np.sum(self.overlap_values() ** 2, axis=-1)))


def _shift_difference(values: np.ndarray, axis: int, n: int) -> np.ndarray:
    upper = [slice(None)] * values.ndim
    lower = [slice(None)] * values.ndim
    upper[axis] = slice(n, None)
    lower[axis] = slice(None, -n)
    return values[tuple(upper)] - values[tuple(lower)]


def _magnitude(field: Field) -> np.ndarray:
    trailing = field.values.ndim - field.grid.dim
    if trailing == 0:
        return np.abs(field.values)
    axes = tuple(range(field.grid.dim, field.values.ndim))
    return np.sqrt(np.sum(field.values**2, axis=axes))


@track(module="discrete_calculus")
def discrete_gradient(f: Field, grid: Optional[Grid] = None) -> ShiftedDifferenceField:
    grid = grid or f.grid
    n = grid.cells_per_unit
    if any(c < 2 * n for c in grid.cells):
        raise GridTooSmall(f"The discrete gradient needs at least two unit cells per axis, got {grid.cells} cells")
    components = []
    for axis in range(grid.dim):
        cells = list(grid.cells)
        cells[axis] -= n
        values = _shift_difference(f.values, axis, n)
        components.append(type(f)(grid.subgrid((0,) * grid.dim, cells), values))
    return ShiftedDifferenceField(components, grid)


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _compensated_prefix(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Neumaier prefix sums along axis 0 as (high, low) parts; entry k holds the sum of the first k rows."""
    hi = np.zeros((values.shape[0] + 1,) + values.shape[1:])
    lo = np.zeros_like(hi)
    total = np.zeros(values.shape[1:])
    compensation = np.zeros(values.shape[1:])
    for k in range(values.shape[0]):
        x = values[k]
        t = total + x
        compensation += np.where(np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total)
        total = t
        hi[k + 1] = total
        lo[k + 1] = compensation
    return hi, lo


def window_sums(values: np.ndarray, n: int, axis: int) -> np.ndarray:
    """Sums of ``n`` consecutive entries along ``axis`` from compensated prefix sums."""
    moved = np.moveaxis(values, axis, 0)
    hi, lo = _compensated_prefix(moved)
    diff, err = _two_sum(hi[n:], -hi[:-n])
    sums = diff + (err + (lo[n:] - lo[:-n]))
    return np.moveaxis(sums, 0, axis)


def window_integrals(values: np.ndarray, grid: Grid) -> np.ndarray:
    """∫_{Q+z} of a cell-sampled array for every edge-aligned unit window inside the grid."""
    n = grid.cells_per_unit
    if any(c < n for c in grid.cells):
        raise GridTooSmall(f"A unit window does not fit in a grid of {grid.cells} cells at {n} per unit")
    sums = values
    for axis in range(grid.dim):
        sums = window_sums(sums, n, axis)
    return sums * grid.cell_volume


def window_grid(grid: Grid) -> Grid:
    n = grid.cells_per_unit
    return grid.subgrid((0,) * grid.dim, tuple(c - n + 1 for c in grid.cells))


@track(module="discrete_calculus")
def local_average(f: Field, absolute: bool = True) -> ScalarField:
    """M(|f|), or M(f) for a scalar f when ``absolute`` is False."""
    if absolute or not isinstance(f, ScalarField):
        values = _magnitude(f)
    else:
        values = f.values
    return ScalarField(window_grid(f.grid), window_integrals(values, f.grid))


def lp_norm(values: np.ndarray, cell_volume: float, p: float) -> float:
    """Midpoint-rule L^p norm of cell samples."""
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    peak = float(values.max())
    if peak == 0:
        return 0.0
    # scale by the peak so large p* does not overflow
    return peak * float(np.sum((values / peak) ** p) * cell_volume) ** (1.0 / p)


def sobolev_exponent(p: float, d: int) -> float:
    if not 1 <= p < d:
        raise ExponentOutOfRange(f"p* = pd/(d-p) needs 1 <= p < d, got p={p}, d={d}")
    return p * d / (d - p)


@track(module="discrete_calculus")
def norms(f: Field, p: float) -> NormReport:
    """‖δf‖_{L^p}, ‖M(|f|)‖_{L^{p*}} and the local L² norm of a sampled field."""
    if p < 1:
        raise ExponentOutOfRange(f"p must be >= 1, got {p}")
    grid = f.grid
    delta = discrete_gradient(f)
    lp_of_delta = lp_norm(delta.magnitude().values, grid.cell_volume, p)
    magnitude = _magnitude(f)
    local_l2 = window_integrals(magnitude**2, grid)
    report = NormReport(
        p=p,
        lp_of_delta=lp_of_delta,
        l2_unif=math.sqrt(max(float(local_l2.max()), 0.0)),
        delta_cells=list(delta.overlap_cells()),
        window_cells=list(window_grid(grid).cells),
    )
    if p < grid.dim:
        p_star = sobolev_exponent(p, grid.dim)
        averages = window_integrals(magnitude, grid)
        report.p_star = p_star
        report.ep_norm = lp_norm(averages, grid.cell_volume, p_star)
        report.ap_norm = report.ep_norm + lp_of_delta
    return report


def _anchor_start(grid: Grid) -> Tuple[int, ...]:
    n = grid.cells_per_unit
    try:
        offset = grid.lattice_offset()
    except GridMisaligned:
        return (0,) * grid.dim
    if all(0 <= a and a + n <= c for a, c in zip(offset, grid.cells)):
        return offset
    return (0,) * grid.dim


def _extend_axis(u: np.ndarray, delta: np.ndarray, start: int, n: int, axis: int):
    """Fill ``u`` along ``axis`` from the known slab [start, start + n) using u(x + e) = u(x) + δu(x)."""
    u_moved = np.moveaxis(u, axis, 0)
    d_moved = np.moveaxis(delta, axis, 0)
    count = u_moved.shape[0]
    for i in range(start + n, count):
        u_moved[i] = u_moved[i - n] + d_moved[i - n]
    for i in range(start - 1, -1, -1):
        u_moved[i] = u_moved[i + n] - d_moved[i]


@track(module="discrete_calculus")
def compatibility_defect(T: ShiftedDifferenceField) -> float:
    """max |δ_2 T_1 - δ_1 T_2| on the common domain (0 in one dimension)."""
    if T.dim == 1:
        return 0.0
    n = T.source_grid.cells_per_unit
    t0, t1 = T.components[0].values, T.components[1].values
    d1_t0 = _shift_difference(t0, 1, n)
    d0_t1 = _shift_difference(t1, 0, n)
    if d1_t0.size == 0:
        return 0.0
    return float(np.max(np.abs(d1_t0 - d0_t1)))


@track(module="discrete_calculus")
def potential_from_discrete_gradient(
    T: ShiftedDifferenceField, base: Optional[Union[ScalarField, np.ndarray]] = None
) -> ScalarField:
    """Reconstruct u with δu = T.

    u takes the values ``base`` on the anchor block, which is the unit cube Q when the grid contains it and the
    lowest unit block otherwise.
    """
    grid = T.source_grid
    n = grid.cells_per_unit
    for axis, component in enumerate(T.components):
        expected = list(grid.cells)
        expected[axis] -= n
        if component.values.shape != tuple(expected):
            raise IncompatibleField(math.inf, 0.0)
    scale = max([1.0] + [float(np.max(np.abs(c.values))) if c.values.size else 0.0 for c in T.components])
    tolerance = COMPATIBILITY_TOL * scale
    defect = compatibility_defect(T)
    if defect > tolerance:
        raise IncompatibleField(defect, tolerance)

    start = _anchor_start(grid)
    u = np.zeros(grid.cells)
    block = tuple(slice(s, s + n) for s in start)
    if base is not None:
        u[block] = base.values if isinstance(base, ScalarField) else np.asarray(base, dtype=float)

    if grid.dim == 1:
        _extend_axis(u, T.components[0].values, start[0], n, 0)
    else:
        strip = (slice(None), slice(start[1], start[1] + n))
        _extend_axis(u[strip], T.components[0].values[strip], start[0], n, 0)
        _extend_axis(u, T.components[1].values, start[1], n, 1)
    return ScalarField(grid, u)


def _covers_cube(grid: Grid, radius: float) -> bool:
    return grid.covers([-radius] * grid.dim, [radius] * grid.dim)


@track(module="discrete_calculus")
def annulus_periodic_mean(f: ScalarField, N: int, p: float = 2.0) -> Tuple[ScalarField, float]:
    """Periodic mean of f over the unit cubes of the annulus A_N = Q_2N \\ Q_N, and the Poincaré ratio

    ``‖f - f_per,N‖_{L^p(A_N)} / (N ‖δf‖_{L^p(Q_6N \\ Q_N)})``.

    Q_R is the open cube max|x_i| < R. The ratio is inf when only the denominator vanishes and 0 for 0/0.
    """
    grid = f.grid
    n = grid.cells_per_unit
    if N < 1:
        raise GridTooSmall(f"N must be >= 1, got {N}")
    if not _covers_cube(grid, 6 * N):
        raise GridTooSmall(f"annulus_periodic_mean needs a grid covering Q_{6 * N}")
    if grid.dim == 1:
        message = "The annulus Q_2N \\ Q_N is disconnected in one dimension; the Poincaré bound does not apply"
        log.warning(message)
        warnings.warn(message, DisconnectedWarning, stacklevel=3)

    offset = grid.lattice_offset()
    blocks = []
    for index in np.ndindex(*(4 * N,) * grid.dim):
        k = tuple(-2 * N + i for i in index)
        if any(ki >= N or ki <= -N - 1 for ki in k):
            start = tuple(a + ki * n for a, ki in zip(offset, k))
            blocks.append(f.values[tuple(slice(s, s + n) for s in start)])
    stack = np.stack(blocks)
    periodic = stack.mean(axis=0)
    numerator = lp_norm(stack - periodic, grid.cell_volume, p)

    delta = discrete_gradient(f).magnitude()
    sup = delta.grid.sup_norms()
    shell = (sup >= N) & (sup < 6 * N)
    denominator = N * lp_norm(delta.values[shell], grid.cell_volume, p)

    if denominator > 0:
        ratio = numerator / denominator
    else:
        ratio = math.inf if numerator > 0 else 0.0
    return ScalarField(Grid.unit_cell(grid.dim, n), periodic), ratio


def _log_log_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    predicted = slope * np.log(x) + intercept
    residual = float(np.sum((np.log(y) - predicted) ** 2))
    total = float(np.sum((np.log(y) - np.log(y).mean()) ** 2))
    r2 = 1.0 if total == 0 else 1.0 - residual / total
    return float(slope), float(intercept), r2


def fit_decay(radii: Sequence[float], values: Sequence[float], what: str = "values") -> DecayFit:
    """Least-squares slope of ln(value) against ln(radius)."""
    radii = [float(r) for r in radii]
    values = [float(v) for v in values]
    if len(radii) < 3:
        raise InsufficientRadii(f"A decay fit needs at least 3 radii, got {len(radii)}")
    if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise InsufficientRadii(f"Radii must be positive and strictly increasing: {radii}")
    if any(v <= 0 for v in values):
        message = f"Some {what} vanish; no logarithmic decay fit is possible"
        log.warning(message)
        warnings.warn(message, DegenerateFitWarning, stacklevel=3)
        return DecayFit(radii, values, None, None, None, degenerate=True)
    slope, intercept, r2 = _log_log_fit(np.array(radii), np.array(values))
    return DecayFit(radii, values, slope, intercept, r2)


@track(module="discrete_calculus")
def ball_average_decay(f: Field, radii: Sequence[float], reference_exponent: Optional[float] = None) -> DecayFit:
    """Fit (1/|B_R|) ∫_{B_R} |f| ~ R^slope over the given radii."""
    if len(radii) < 3:
        raise InsufficientRadii(f"A decay fit needs at least 3 radii, got {len(radii)}")
    grid = f.grid
    if not _covers_cube(grid, max(radii)):
        raise DomainTooSmall(f"Ball of radius {max(radii)} is not inside the grid")
    magnitude = _magnitude(f)
    r = grid.radii()
    averages = []
    for radius in radii:
        inside = r < radius
        averages.append(float(magnitude[inside].mean()) if inside.any() else 0.0)
    fit = fit_decay(radii, averages, what="ball averages")
    if reference_exponent is not None:
        fit.reference_exponent = reference_exponent
    return fit


def unit_ball_indicator(points: np.ndarray) -> np.ndarray:
    return (np.sqrt(np.sum(points**2, axis=-1)) < 1.0).astype(float)


@track(module="discrete_calculus")
def weak_star_vanishing(
    f: Field,
    eps_list: Sequence[float],
    testfn: Callable[[np.ndarray], np.ndarray] = unit_ball_indicator,
    support_radius: float = 1.0,
) -> List[float]:
    """∫ |f(x/ε)| φ(x) dx for each ε, computed as ε^d Σ |f(y)| φ(εy) h^d over the samples of f."""
    grid = f.grid
    magnitude = _magnitude(f)
    centers = grid.centers()
    results = []
    for eps in eps_list:
        if not _covers_cube(grid, support_radius / eps):
            raise DomainTooSmall(f"supp φ(ε·) with ε={eps} leaves the sampled extent {grid.origin}..{grid.upper}")
        weights = testfn(eps * centers)
        results.append(float(eps**grid.dim * np.sum(magnitude * weights) * grid.cell_volume))
    return results


def holder_modulus(f: ScalarField, alpha: float, periodic: bool = False) -> float:
    """Grid-level Hölder modulus max |f(x + h e_i) - f(x)| / h^α, wrapping around the grid when ``periodic``."""
    grid = f.grid
    peak = 0.0
    for axis in range(grid.dim):
        if periodic:
            diff = np.roll(f.values, -1, axis=axis) - f.values
        else:
            diff = _shift_difference(f.values, axis, 1)
        if diff.size:
            peak = max(peak, float(np.max(np.abs(diff))))
    return peak / grid.h**alpha


def periodic_block_mean(f: ScalarField, shifts: Sequence[Sequence[int]]) -> ScalarField:
    """(1/#shifts) Σ_k f(· + k) restricted to Q."""
    blocks = [unit_cell_block(f, k).values for k in shifts]
    grid = Grid.unit_cell(f.grid.dim, f.grid.cells_per_unit)
    return ScalarField(grid, np.mean(blocks, axis=0))
