"""Cell-centered finite-volume discretization of -div(a∇u) and a preconditioned conjugate-gradient solver.

Each face between two cells carries a transmissibility ``T = a_face · h^(d-2)`` where ``a_face`` is the harmonic
(default) or arithmetic mean of the two cells' normal coefficient. Homogeneous Dirichlet data sits on the cell faces,
so a boundary face contributes ``2 · a · h^(d-2)`` to the diagonal; with a mask the faces between active and
inactive cells are treated the same way. Off-diagonal coefficients enter through corner gradients shared by the
four cells around each grid vertex, which keeps the matrix symmetric.

Linear functions ``x ↦ q·x`` are handled through their constant face increments ``h q_k``, so operators can be
applied to ``u + q·x`` on periodic grids without forming the (non-periodic) linear part.
"""
import logging
import math
from enum import Enum
from typing import Optional, Sequence, Tuple

import attrs
import numpy as np
from scipy import sparse

from homoglab.decorators import track
from homoglab.exceptions import EllipticityViolation, NoConvergence, Singular
from homoglab.grid_fields import Grid, MatrixField, ScalarField, VectorField, check_uniform_ellipticity
from homoglab.internal.models import SolveStats
from homoglab.lab import current_settings

log = logging.getLogger("homoglab")

# relative size of Σb tolerated for a periodic right-hand side
COMPATIBILITY_TOL = 1e-10

_SX = np.array([-1.0, 1.0, -1.0, 1.0])
_SY = np.array([-1.0, -1.0, 1.0, 1.0])


class BoundaryCondition(str, Enum):
    periodic = "periodic"
    dirichlet = "dirichlet"


def face_average(left: np.ndarray, right: np.ndarray, averaging: str) -> np.ndarray:
    if averaging == "harmonic":
        return 2.0 * left * right / (left + right)
    return 0.5 * (left + right)


@attrs.define(eq=False)
class DiscreteOperator:
    grid: Grid
    coefficient: MatrixField
    bc: BoundaryCondition
    averaging: str
    mask: Optional[np.ndarray]
    face_lo: np.ndarray
    face_hi: np.ndarray
    face_axis: np.ndarray
    face_T: np.ndarray
    boundary_cell: np.ndarray
    boundary_axis: np.ndarray
    boundary_side: np.ndarray
    boundary_T: np.ndarray
    corners: np.ndarray
    corner_a12: np.ndarray
    active: np.ndarray
    matrix: sparse.csr_matrix

    @property
    def periodic(self) -> bool:
        return self.bc == BoundaryCondition.periodic

    @property
    def unknowns(self) -> int:
        return int(self.active.size)

    def stencil_scale(self) -> float:
        """Factor turning matrix rows into point values of -div(a∇u): the cell volume."""
        return self.grid.cell_volume

    def apply_affine(
        self, values: np.ndarray, slope: Optional[Sequence[float]] = None, include_boundary: bool = True
    ) -> np.ndarray:
        """Per-cell result of the operator applied to ``values + slope·x``, shape ``grid.cells``.

        With ``include_boundary=False`` only interior (and wrap) faces and corners contribute.
        """
        grid = self.grid
        h = grid.h
        u = np.asarray(values, dtype=float).ravel()
        shift = np.zeros(grid.dim) if slope is None else np.asarray(slope, dtype=float) * h
        delta = u[self.face_hi] - u[self.face_lo] + shift[self.face_axis]
        flux = self.face_T * delta
        result = np.bincount(self.face_hi, weights=flux, minlength=grid.size)
        result -= np.bincount(self.face_lo, weights=flux, minlength=grid.size)
        if include_boundary and self.boundary_cell.size:
            boundary = self.boundary_T * u[self.boundary_cell]
            result += np.bincount(self.boundary_cell, weights=boundary, minlength=grid.size)
        if self.corners.size:
            local = u[self.corners]
            dx = local @ _SX + 2 * shift[0]
            dy = local @ _SY + 2 * shift[1]
            weight = 0.25 * self.corner_a12
            for position in range(4):
                contribution = weight * (dx * _SY[position] + dy * _SX[position])
                result += np.bincount(self.corners[:, position], weights=contribution, minlength=grid.size)
        return result.reshape(grid.cells)

    def flux_integrals(self, values: np.ndarray, slope: Sequence[float]) -> np.ndarray:
        """∫ a(∇u + slope) over the grid, component by component, from face and corner fluxes."""
        grid = self.grid
        h = grid.h
        u = np.asarray(values, dtype=float).ravel()
        shift = np.asarray(slope, dtype=float) * h
        delta = u[self.face_hi] - u[self.face_lo] + shift[self.face_axis]
        flux = self.face_T * delta
        totals = np.array([h * float(np.sum(flux[self.face_axis == axis])) for axis in range(grid.dim)])
        if self.corners.size:
            local = u[self.corners]
            dx = (local @ _SX) / (2 * h) + slope[0]
            dy = (local @ _SY) / (2 * h) + slope[1]
            totals[0] += h**2 * float(np.sum(self.corner_a12 * dy))
            totals[1] += h**2 * float(np.sum(self.corner_a12 * dx))
        return totals

    def gradient_norm(self, values: np.ndarray, include_boundary: bool = True) -> float:
        """Discrete ‖∇u‖_{L²} from face differences; boundary faces use the half-cell distance to zero data."""
        grid = self.grid
        h = grid.h
        u = np.asarray(values, dtype=float).ravel()
        delta = (u[self.face_hi] - u[self.face_lo]) / h
        total = float(np.sum(delta**2)) * grid.cell_volume
        if include_boundary and self.boundary_cell.size:
            edge = u[self.boundary_cell] / (0.5 * h)
            total += float(np.sum(edge**2)) * 0.5 * grid.cell_volume
        return math.sqrt(total)

    def rhs_from_source(self, source: ScalarField) -> np.ndarray:
        return source.values.ravel() * self.grid.cell_volume

    def rhs_from_div_source(self, div_source: VectorField) -> np.ndarray:
        """∫_cell div(g) from face values of g: averages of the adjacent cells, one-sided at Dirichlet faces."""
        grid = self.grid
        g = div_source.values.reshape(grid.size, grid.dim)
        area = grid.h ** (grid.dim - 1)
        axis = self.face_axis
        face_g = 0.5 * (g[self.face_lo, axis] + g[self.face_hi, axis]) * area
        result = np.bincount(self.face_lo, weights=face_g, minlength=grid.size)
        result -= np.bincount(self.face_hi, weights=face_g, minlength=grid.size)
        if self.boundary_cell.size:
            edge = g[self.boundary_cell, self.boundary_axis] * self.boundary_side * area
            result += np.bincount(self.boundary_cell, weights=edge, minlength=grid.size)
        return result


def _faces(grid: Grid, periodic: bool, active: np.ndarray):
    index = np.arange(grid.size).reshape(grid.cells)
    lo, hi, axes = [], [], []
    b_cell, b_axis, b_side = [], [], []
    for axis in range(grid.dim):
        count = grid.cells[axis]
        left = np.take(index, range(0, count - 1), axis=axis).ravel()
        right = np.take(index, range(1, count), axis=axis).ravel()
        first = np.take(index, [0], axis=axis).ravel()
        last = np.take(index, [count - 1], axis=axis).ravel()
        if periodic:
            left = np.concatenate([left, last])
            right = np.concatenate([right, first])
        both = active[left] & active[right]
        lo.append(left[both])
        hi.append(right[both])
        axes.append(np.full(int(both.sum()), axis))
        # faces leaving the active region
        cut_left = active[left] & ~active[right]
        cut_right = active[right] & ~active[left]
        b_cell += [left[cut_left], right[cut_right]]
        b_side += [np.ones(int(cut_left.sum())), -np.ones(int(cut_right.sum()))]
        b_axis += [np.full(int(cut_left.sum()), axis), np.full(int(cut_right.sum()), axis)]
        if not periodic:
            on_lower = first[active[first]]
            on_upper = last[active[last]]
            b_cell += [on_lower, on_upper]
            b_side += [-np.ones(on_lower.size), np.ones(on_upper.size)]
            b_axis += [np.full(on_lower.size, axis), np.full(on_upper.size, axis)]
    as_int = lambda parts: np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, dtype=np.int64)
    return as_int(lo), as_int(hi), as_int(axes), as_int(b_cell), as_int(b_axis), np.concatenate(b_side)


def _corners(grid: Grid, periodic: bool, active: np.ndarray) -> np.ndarray:
    index = np.arange(grid.size).reshape(grid.cells)
    if periodic:
        c00 = index
        c10 = np.roll(index, -1, axis=0)
        c01 = np.roll(index, -1, axis=1)
        c11 = np.roll(c10, -1, axis=1)
    else:
        c00 = index[:-1, :-1]
        c10 = index[1:, :-1]
        c01 = index[:-1, 1:]
        c11 = index[1:, 1:]
    corners = np.stack([c00.ravel(), c10.ravel(), c01.ravel(), c11.ravel()], axis=-1)
    keep = np.all(active[corners], axis=-1)
    return corners[keep]


@track(module="elliptic_solver")
def assemble(
    a: MatrixField,
    grid: Optional[Grid] = None,
    bc: BoundaryCondition = BoundaryCondition.dirichlet,
    mask: Optional[np.ndarray] = None,
    averaging: Optional[str] = None,
) -> DiscreteOperator:
    """Assemble the finite-volume operator of -div(a∇·) with the given boundary condition."""
    grid = grid or a.grid
    bc = BoundaryCondition(bc)
    periodic = bc == BoundaryCondition.periodic
    if mask is not None and periodic:
        raise ValueError("Masks are only supported with Dirichlet boundary conditions")
    lambda_min, _ = check_uniform_ellipticity(a)
    if not lambda_min > 0:
        raise EllipticityViolation(lambda_min, 0.0)

    averaging = averaging or current_settings().averaging
    diagonal = a.is_diagonal()
    if not diagonal and averaging == "harmonic":
        log.debug("full-matrix coefficient: switching to arithmetic face averages")
        averaging = "arithmetic"

    active = np.ones(grid.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool).ravel()
    lo, hi, axes, b_cell, b_axis, b_side = _faces(grid, periodic, active)

    scale = grid.h ** (grid.dim - 2)
    normal = np.stack([a.values[..., k, k].ravel() for k in range(grid.dim)], axis=-1)
    face_T = face_average(normal[lo, axes], normal[hi, axes], averaging) * scale
    boundary_T = 2.0 * normal[b_cell, b_axis] * scale

    if grid.dim == 2 and not diagonal:
        corners = _corners(grid, periodic, active)
        corner_a12 = a.values[..., 0, 1].ravel()[corners].mean(axis=-1)
    else:
        corners = np.zeros((0, 4), dtype=np.int64)
        corner_a12 = np.zeros(0)

    rows = [lo, hi, lo, hi, b_cell]
    cols = [lo, hi, hi, lo, b_cell]
    data = [face_T, face_T, -face_T, -face_T, boundary_T]
    if corners.size:
        local = 0.25 * (np.outer(_SX, _SY) + np.outer(_SY, _SX))
        for i in range(4):
            for j in range(4):
                if local[i, j]:
                    rows.append(corners[:, i])
                    cols.append(corners[:, j])
                    data.append(corner_a12 * local[i, j])
    full = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.size, grid.size)
    ).tocsr()
    active_index = np.flatnonzero(active)
    matrix = full[active_index][:, active_index].tocsr()

    return DiscreteOperator(
        grid=grid,
        coefficient=a,
        bc=bc,
        averaging=averaging,
        mask=None if mask is None else active.reshape(grid.cells),
        face_lo=lo,
        face_hi=hi,
        face_axis=axes,
        face_T=face_T,
        boundary_cell=b_cell,
        boundary_axis=b_axis,
        boundary_side=b_side,
        boundary_T=boundary_T,
        corners=corners,
        corner_a12=corner_a12,
        active=active_index,
        matrix=matrix,
    )


def _project(vector: np.ndarray) -> np.ndarray:
    return vector - vector.mean()


def conjugate_gradient(
    matrix: sparse.csr_matrix, b: np.ndarray, tol: float, max_iterations: int, project: bool = False
) -> Tuple[np.ndarray, int, float]:
    """Jacobi-preconditioned CG; with ``project`` every iterate is kept orthogonal to the constants."""
    diagonal = matrix.diagonal()
    inverse = 1.0 / diagonal
    b_norm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if b_norm == 0:
        return x, 0, 0.0
    r = b.copy()
    z = inverse * r
    if project:
        z = _project(z)
    p = z.copy()
    rz = float(r @ z)
    residual = 1.0
    for iteration in range(1, max_iterations + 1):
        Ap = matrix @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if project:
            x = _project(x)
            r = _project(r)
        residual = float(np.linalg.norm(r)) / b_norm
        if residual <= tol:
            true_r = b - matrix @ x
            if project:
                true_r = _project(true_r)
            residual = float(np.linalg.norm(true_r)) / b_norm
            if residual <= tol:
                return x, iteration, residual
            # recurrence drifted: restart from the true residual
            r = true_r
            z = inverse * r
            if project:
                z = _project(z)
            p = z.copy()
            rz = float(r @ z)
            continue
        z = inverse * r
        if project:
            z = _project(z)
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
        if iteration % 500 == 0:
            log.debug("cg iteration %d residual %.3e", iteration, residual)
    raise NoConvergence(max_iterations, residual)


@track(module="elliptic_solver")
def solve(
    op: DiscreteOperator,
    source: Optional[ScalarField] = None,
    div_source: Optional[VectorField] = None,
    rhs: Optional[np.ndarray] = None,
    tol: Optional[float] = None,
) -> Tuple[ScalarField, SolveStats]:
    """Solve -div(a∇u) = source + div(div_source) (+ a pre-integrated ``rhs`` over all grid cells)."""
    settings = current_settings()
    tol = tol or settings.tolerance
    grid = op.grid
    b = np.zeros(grid.size)
    if source is not None:
        b += op.rhs_from_source(source)
    if div_source is not None:
        b += op.rhs_from_div_source(div_source)
    if rhs is not None:
        b += np.asarray(rhs, dtype=float).ravel()
    b = b[op.active]

    if op.periodic:
        total = float(np.sum(b))
        if abs(total) > COMPATIBILITY_TOL * max(float(np.sum(np.abs(b))), 1e-300):
            raise Singular(f"Periodic right-hand side is not compatible: Σb = {total:.3e}")
        b = _project(b)

    cap = settings.iteration_cap(op.unknowns)
    x, iterations, residual = conjugate_gradient(op.matrix, b, tol, cap, project=op.periodic)
    if op.periodic:
        x = _project(x)
    log.debug("solved %d unknowns in %d iterations (residual %.3e)", op.unknowns, iterations, residual)

    values = np.zeros(grid.size)
    values[op.active] = x
    stats = SolveStats(
        iterations=iterations, residual=residual, projected=op.periodic, unknowns=op.unknowns, tolerance=tol
    )
    return ScalarField(grid, values.reshape(grid.cells)), stats
