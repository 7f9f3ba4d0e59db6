"""Periodic and defect correctors, the homogenized tensor and the sublinearity diagnostics.

The periodic corrector w_per,q solves -div(a_per(∇w + q)) = 0 on the unit cell with zero mean. The defect corrector
w̃_q of a perturbed coefficient a = a_per + ã solves -div(a∇w̃) = div(ã(∇w_per,q + q)) in the whole space; here it
is truncated to a centered box Q_R with zero Dirichlet data and measured on the inner window Q_{R_inner}.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import attrs
import numpy as np

from homoglab.decorators import track
from homoglab.discrete_calculus import fit_decay, norms
from homoglab.elliptic_solver import BoundaryCondition, DiscreteOperator, assemble, solve
from homoglab.exceptions import (
    DomainTooSmall,
    ExponentOutOfRange,
    GridMisaligned,
    InsufficientRadii,
    NoConvergence,
    NotContracting,
    ResolutionMismatch,
    TruncationUnstable,
)
from homoglab.grid_fields import Grid, MatrixField, ScalarField, VectorField, periodic_extension
from homoglab.internal.models import ContractionTrace, DecayFit, HomogenizedTensor, NormReport, SolveStats
from homoglab.lab import map_jobs

log = logging.getLogger("homoglab")

TRUNCATION_TOL = 0.05
CONTRACTION_LIMIT = 0.95
FIXED_POINT_TOL = 1e-6

Direction = Union[int, Sequence[float]]


@attrs.define(eq=False)
class CorrectorSolution:
    """Correctors for one direction q.

    ``w_tilde`` and the fields derived from it are only set by the defect solve, and are restricted to the inner
    window Q_{R_inner}.
    """

    direction: Direction
    w_per: ScalarField
    grad_w_per: VectorField
    stats: SolveStats
    w_tilde: Optional[ScalarField] = None
    grad_w_tilde: Optional[VectorField] = None
    ap_report: Optional[NormReport] = None
    sublinearity: Optional[DecayFit] = None
    truncation_change: Optional[float] = None
    inner_residual: Optional[float] = None

    @property
    def slope(self) -> np.ndarray:
        return _slope(self.direction, self.w_per.grid.dim)

    def to_dict(self):
        result = {
            "direction": self.direction if isinstance(self.direction, int) else [float(q) for q in self.direction],
            "cells_per_unit": self.w_per.grid.cells_per_unit,
            "w_per_sup": float(np.max(np.abs(self.w_per.values))),
            "w_per_mean": float(np.mean(self.w_per.values)),
            "stats": self.stats.to_dict(),
        }
        if self.w_tilde is not None:
            result["w_tilde_sup"] = float(np.max(np.abs(self.w_tilde.values)))
            result["inner_window"] = self.w_tilde.grid.to_dict()
        if self.ap_report is not None:
            result["ap_report"] = self.ap_report.to_dict()
        if self.sublinearity is not None:
            result["sublinearity"] = self.sublinearity.to_dict()
        if self.truncation_change is not None:
            result["truncation_change"] = self.truncation_change
        if self.inner_residual is not None:
            result["inner_residual"] = self.inner_residual
        return result


def _slope(q: Direction, dim: int) -> np.ndarray:
    if isinstance(q, (int, np.integer)):
        if not 0 <= q < dim:
            raise ValueError(f"direction index {q} is out of range for d = {dim}")
        slope = np.zeros(dim)
        slope[q] = 1.0
        return slope
    slope = np.asarray(q, dtype=float)
    if slope.shape != (dim,):
        raise ValueError(f"direction {q} does not have {dim} components")
    return slope


def _check_unit_cell(grid: Grid):
    n = grid.cells_per_unit
    if tuple(grid.cells) != (n,) * grid.dim or grid.lattice_offset() != (0,) * grid.dim:
        raise GridMisaligned(f"Periodic coefficients must be sampled on Q = [0, 1)^d, got {grid}")


def cell_gradient(u: ScalarField, periodic: bool = False) -> VectorField:
    """Centered differences at cell centers; one-sided at the edges of a non-periodic grid."""
    grid = u.grid
    h = grid.h
    components = []
    for axis in range(grid.dim):
        if periodic:
            components.append((np.roll(u.values, -1, axis=axis) - np.roll(u.values, 1, axis=axis)) / (2 * h))
        elif grid.cells[axis] > 1:
            components.append(np.gradient(u.values, h, axis=axis))
        else:
            components.append(np.zeros(grid.cells))
    return VectorField(grid, np.stack(components, axis=-1))


def face_gradients(u: ScalarField) -> List[np.ndarray]:
    """(u_i - u_{i-1})/h on the lower face of every cell of a periodic field, one array per axis."""
    h = u.grid.h
    return [(u.values - np.roll(u.values, 1, axis=axis)) / h for axis in range(u.grid.dim)]


def periodic_interpolate(values: np.ndarray, points: np.ndarray, offsets: Sequence[float]) -> np.ndarray:
    """Multilinear interpolation of Q-periodic samples.

    ``values`` has n samples per axis at positions ``(i + offsets[axis]) / n``; ``points`` has shape ``(..., d)``.
    """
    values = np.asarray(values, dtype=float)
    points = np.asarray(points, dtype=float)
    dim = values.ndim
    n = values.shape[0]
    lower, weight = [], []
    for axis in range(dim):
        t = np.mod(points[..., axis], 1.0) * n - offsets[axis]
        base = np.floor(t)
        lower.append(base.astype(np.int64))
        weight.append(t - base)
    result = np.zeros(points.shape[:-1])
    for corner in np.ndindex(*(2,) * dim):
        index = tuple(np.mod(lower[axis] + corner[axis], n) for axis in range(dim))
        factor = np.ones(points.shape[:-1])
        for axis in range(dim):
            factor = factor * (weight[axis] if corner[axis] else 1.0 - weight[axis])
        result = result + factor * values[index]
    return result


@track(module="corrector")
def periodic_corrector(
    a_per: MatrixField, q: Direction, op: Optional[DiscreteOperator] = None
) -> CorrectorSolution:
    """Zero-mean periodic solution of -div(a_per(∇w + q)) = 0 on the unit cell.

    The right-hand side div(a_per q) is built from the cell operator's own face coefficients.
    """
    _check_unit_cell(a_per.grid)
    slope = _slope(q, a_per.grid.dim)
    op = op or assemble(a_per, bc=BoundaryCondition.periodic)
    rhs = -op.apply_affine(np.zeros(a_per.grid.cells), slope, include_boundary=False)
    w, stats = solve(op, rhs=rhs)
    return CorrectorSolution(direction=q, w_per=w, grad_w_per=cell_gradient(w, periodic=True), stats=stats)


@track(module="corrector")
def homogenized_tensor(
    a_per: MatrixField, correctors: Sequence[CorrectorSolution], op: Optional[DiscreteOperator] = None
) -> HomogenizedTensor:
    """(a*)_ij = ∫_Q e_i · a_per(e_j + ∇w_j), integrated from the face and corner fluxes of the cell operator."""
    grid = a_per.grid
    _check_unit_cell(grid)
    d = grid.dim
    by_direction = {}
    for corrector in correctors:
        if corrector.w_per.grid != grid:
            raise ResolutionMismatch(f"Corrector on {corrector.w_per.grid} does not match the coefficient grid {grid}")
        if isinstance(corrector.direction, (int, np.integer)):
            by_direction[int(corrector.direction)] = corrector
    missing = [j for j in range(d) if j not in by_direction]
    if missing:
        raise ResolutionMismatch(f"Missing correctors for direction(s) {missing}")

    op = op or assemble(a_per, bc=BoundaryCondition.periodic)
    matrix = np.zeros((d, d))
    for j in range(d):
        matrix[:, j] = op.flux_integrals(by_direction[j].w_per.values, _slope(j, d))
    asymmetry = float(np.max(np.abs(matrix - matrix.T)))
    if asymmetry > 1e-8 * float(np.max(np.abs(matrix))):
        log.warning("homogenized tensor asymmetry %.3e before symmetrization", asymmetry)
    symmetric = 0.5 * (matrix + matrix.T)
    return HomogenizedTensor(
        matrix=symmetric.tolist(),
        asymmetry=asymmetry,
        cells_per_unit=grid.cells_per_unit,
        averaging=op.averaging,
        solver_stats=[by_direction[j].stats for j in range(d)],
    )


@track(module="corrector")
def solve_cell_problem(a_per: MatrixField) -> Tuple[List[CorrectorSolution], HomogenizedTensor]:
    """Correctors for every basis direction and the homogenized tensor built from them."""
    op = assemble(a_per, bc=BoundaryCondition.periodic)
    correctors = map_jobs(lambda j: periodic_corrector(a_per, j, op=op), range(a_per.grid.dim))
    return correctors, homogenized_tensor(a_per, correctors, op=op)


def _centered_half_width(grid: Grid) -> float:
    half = grid.upper[0]
    for lower, upper in zip(grid.origin, grid.upper):
        if abs(lower + half) > 1e-9 or abs(upper - half) > 1e-9:
            raise GridMisaligned(f"Defect correctors need a centered cube [-R, R]^d, got {grid.origin}..{grid.upper}")
    return half


def _on_grid(field, grid: Grid):
    if field.grid == grid:
        return field
    return periodic_extension(field, grid)


def _window(field, half_width: float):
    grid = field.grid
    start = grid.block_start([-half_width] * grid.dim)
    cells = (int(round(2 * half_width * grid.cells_per_unit)),) * grid.dim
    return field.restrict(start, cells)


def _solve_defect(a: MatrixField, a_per: MatrixField, w_per: ScalarField, slope: np.ndarray):
    op = assemble(a, bc=BoundaryCondition.dirichlet)
    op_per = assemble(a_per, bc=BoundaryCondition.dirichlet, averaging=op.averaging)
    # -(A_a - A_per)(w_per + q·x) over interior faces is the discrete div(ã(∇w_per + q))
    rhs = op_per.apply_affine(w_per.values, slope, include_boundary=False) - op.apply_affine(
        w_per.values, slope, include_boundary=False
    )
    u, stats = solve(op, rhs=rhs)
    anchor = u.values[a.grid.lattice_offset()]
    return u.with_values(u.values - anchor), stats, op, rhs


def _relative_gradient_change(u: ScalarField, reference: ScalarField, half_width: float) -> float:
    grad_u = _window(cell_gradient(u), half_width).values
    grad_ref = _window(cell_gradient(reference), half_width).values
    scale = float(np.sqrt(np.sum(grad_u**2)))
    difference = float(np.sqrt(np.sum((grad_u - grad_ref) ** 2)))
    if scale == 0:
        return 0.0 if difference == 0 else math.inf
    return difference / scale


@track(module="corrector")
def defect_corrector_direct(
    a: MatrixField,
    a_per: MatrixField,
    w_per: Union[ScalarField, CorrectorSolution],
    q: Direction,
    R_inner: Optional[float] = None,
    p: float = 1.5,
    check_truncation: bool = True,
) -> CorrectorSolution:
    """Defect corrector on the truncated cube Q_R = [-R, R]^d with zero Dirichlet data, anchored at the origin.

    Diagnostics are restricted to Q_{R_inner} (default R/4). The solve is repeated on Q_{R/2}; when the gradients
    of the two solutions differ by more than 5% in L²(Q_{R_inner}) the truncation is rejected.
    """
    grid = a.grid
    R = _centered_half_width(grid)
    R_inner = R / 4 if R_inner is None else float(R_inner)
    if R < 4 * R_inner:
        raise DomainTooSmall(f"the truncated cube needs R >= 4 R_inner, got R={R}, R_inner={R_inner}")
    if R_inner < 1:
        raise DomainTooSmall(f"the inner window must contain at least one unit cube, got R_inner={R_inner}")
    periodic = w_per if isinstance(w_per, CorrectorSolution) else None
    w_cell = periodic.w_per if periodic is not None else w_per
    if a_per.grid.cells_per_unit != grid.cells_per_unit or w_cell.grid.cells_per_unit != grid.cells_per_unit:
        raise ResolutionMismatch("Periodic data and the perturbed coefficient use different resolutions")

    slope = _slope(q, grid.dim)
    a_per_box = _on_grid(a_per, grid)
    w_box = _on_grid(w_cell, grid)
    u, stats, op, rhs = _solve_defect(a, a_per_box, w_box, slope)

    inner_start = grid.block_start([-R_inner] * grid.dim)
    inner_cells = (int(round(2 * R_inner * grid.cells_per_unit)),) * grid.dim
    inner = tuple(slice(s, s + c) for s, c in zip(inner_start, inner_cells))
    # anchoring shifts u by a constant; the interior rows do not see it
    residual = op.apply_affine(u.values, include_boundary=False) - rhs.reshape(grid.cells)
    b_norm = float(np.linalg.norm(rhs))
    inner_residual = float(np.linalg.norm(residual[inner])) / b_norm if b_norm > 0 else 0.0

    truncation_change = None
    if check_truncation:
        half_cells = 2 * (grid.cells[0] // 4)
        start = ((grid.cells[0] - half_cells) // 2,) * grid.dim
        cells = (half_cells,) * grid.dim
        u_half, _, _, _ = _solve_defect(
            a.restrict(start, cells), a_per_box.restrict(start, cells), w_box.restrict(start, cells), slope
        )
        truncation_change = _relative_gradient_change(u, u_half, R_inner)
        log.debug("truncation change R=%g vs R/2: %.3e", R, truncation_change)
        if truncation_change > TRUNCATION_TOL:
            raise TruncationUnstable(truncation_change)
        if truncation_change > 0.5 * TRUNCATION_TOL:
            log.warning("truncation sensitivity %.2f%% is close to the %.0f%% limit", 100 * truncation_change, 5)

    w_tilde = _window(u, R_inner)
    grad_w_tilde = _window(cell_gradient(u), R_inner)
    ap_report = norms(grad_w_tilde, p) if p >= 1 else None
    sublinearity = None
    if grid.dim / 2 < p < grid.dim and R_inner >= 4 and np.any(w_tilde.values):
        sublinearity = sublinearity_profile(w_tilde, p)

    if periodic is None:
        w_cell_gradient = cell_gradient(w_cell, periodic=True)
        periodic_stats = stats
    else:
        w_cell_gradient = periodic.grad_w_per
        periodic_stats = periodic.stats
    solution = CorrectorSolution(
        direction=q,
        w_per=w_cell,
        grad_w_per=w_cell_gradient,
        stats=periodic_stats,
        w_tilde=w_tilde,
        grad_w_tilde=grad_w_tilde,
        ap_report=ap_report,
        sublinearity=sublinearity,
        truncation_change=truncation_change,
        inner_residual=inner_residual,
    )
    return solution


def _dyadic_radii(max_radius: float, keep: int = 4) -> List[float]:
    radii = []
    r = 1.0
    while r <= max_radius + 1e-12:
        radii.append(r)
        r *= 2
    return radii[-keep:]


@track(module="corrector")
def sublinearity_profile(w: ScalarField, p: float, radii: Optional[Sequence[float]] = None) -> DecayFit:
    """Fit ln(max_{|x| ≈ r} |w(x)| / r) against ln r.

    The maximum is taken over the shell r/√2 <= |x| < r√2. By default the radii are the (up to four) largest
    powers of two inside the sampled cube.
    """
    grid = w.grid
    d = grid.dim
    if not d / 2 < p < d:
        raise ExponentOutOfRange(f"the sublinearity rate d/p* < 1 needs d/2 < p < d, got p={p}, d={d}")
    reach = min(min(-o for o in grid.origin), min(grid.upper))
    if radii is None:
        radii = _dyadic_radii(reach)
    if len(radii) < 3 or reach < 4:
        raise InsufficientRadii(f"need at least 3 radii and samples beyond |x| = 4, got radii {list(radii)}")
    r = grid.radii()
    magnitude = np.abs(w.values)
    values = []
    for radius in radii:
        shell = (r >= radius / math.sqrt(2)) & (r < radius * math.sqrt(2))
        peak = float(magnitude[shell].max()) if shell.any() else 0.0
        values.append(peak / radius)
    fit = fit_decay(radii, values, what="shell maxima")
    p_star = p * d / (d - p)
    fit.reference_exponent = -d / p_star
    return fit


@track(module="corrector")
def defect_corrector_fixed_point(
    a_per: MatrixField,
    a_tilde: Union[MatrixField, ScalarField],
    rhs: VectorField,
    tol: float = FIXED_POINT_TOL,
    max_iterations: int = 200,
    compare_direct: bool = True,
) -> Tuple[ScalarField, ContractionTrace]:
    """Solve -div((a_per + ã)∇u) = div(rhs) with zero Dirichlet data by iterating on the periodic operator.

    Each step solves -div(a_per∇u_{n+1}) = div(rhs) + div(ã∇u_n), written on the discrete level as
    A_per u_{n+1} = b - (A_a - A_per) u_n. The iteration stops once ‖∇(u_{n+1} - u_n)‖ <= tol ‖∇u_{n+1}‖ and fails
    with NotContracting when two consecutive increment ratios reach 0.95.
    """
    grid = rhs.grid
    a_per = _on_grid(a_per, grid)
    if isinstance(a_tilde, ScalarField):
        a_tilde = MatrixField.isotropic(a_tilde)
    if a_tilde.grid != grid:
        raise ResolutionMismatch(f"ã lives on {a_tilde.grid}, the right-hand side on {grid}")
    a = MatrixField(grid, a_per.values + a_tilde.values)
    op_per = assemble(a_per, bc=BoundaryCondition.dirichlet)
    op_a = assemble(a, bc=BoundaryCondition.dirichlet, averaging=op_per.averaging)
    difference = (op_a.matrix - op_per.matrix).tocsr()
    b_f = op_per.rhs_from_div_source(rhs)

    u = np.zeros(grid.size)
    previous_b = None
    increments: List[float] = []
    ratios: List[float] = []
    solves = 0
    converged = False
    relative = math.inf
    for _ in range(max_iterations):
        b = b_f - difference @ u
        if previous_b is not None and np.array_equal(b, previous_b):
            updated = u
        else:
            solution, _ = solve(op_per, rhs=b)
            updated = solution.values.ravel()
            solves += 1
        previous_b = b
        increment = op_per.gradient_norm(updated - u)
        increments.append(increment)
        if len(increments) > 1:
            ratios.append(increment / increments[-2] if increments[-2] > 0 else 0.0)
            log.debug("fixed point step %d: increment %.3e ratio %.3f", len(increments), increment, ratios[-1])
            if len(ratios) >= 2 and min(ratios[-2:]) >= CONTRACTION_LIMIT:
                raise NotContracting(ratios)
        u = updated
        norm = op_per.gradient_norm(u)
        relative = increment / norm if norm > 0 else 0.0
        if increment <= tol * norm:
            converged = True
            break
    if not converged:
        raise NoConvergence(max_iterations, relative)

    trace = ContractionTrace(
        iterations=solves,
        increments=increments,
        ratios=ratios,
        converged=converged,
        amplitude=float(np.max(np.abs(a_tilde.values))),
    )
    result = ScalarField(grid, u.reshape(grid.cells))
    if compare_direct:
        direct, _ = solve(op_a, div_source=rhs)
        scale = op_per.gradient_norm(direct.values)
        distance = op_per.gradient_norm(u - direct.values.ravel())
        trace.direct_distance = distance / scale if scale > 0 else distance
    return result, trace
