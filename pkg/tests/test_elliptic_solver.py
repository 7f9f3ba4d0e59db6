import numpy as np
import pytest

from homoglab import init
from homoglab.coefficients import Laminate
from homoglab.elliptic_solver import BoundaryCondition, assemble, face_average, solve
from homoglab.exceptions import EllipticityViolation, NoConvergence, Singular
from homoglab.grid_fields import Grid, MatrixField, ScalarField, sample_field


def test_face_average():
    left, right = np.array([1.0, 2.0]), np.array([3.0, 2.0])
    np.testing.assert_allclose(face_average(left, right, "harmonic"), [1.5, 2.0])
    np.testing.assert_allclose(face_average(left, right, "arithmetic"), [2.0, 2.0])


def test_dirichlet_1d_constant_source():
    grid = Grid.box([0], [1], 64)
    op = assemble(MatrixField.constant(grid, 1.0))
    u, stats = solve(op, source=ScalarField.constant(grid, 1.0), tol=1e-13)
    x = grid.axis(0)
    # the cell-centered scheme is exact up to the constant h²/8 for a quadratic solution
    np.testing.assert_allclose(u.values - x * (1 - x) / 2, grid.h**2 / 8, atol=1e-9)
    assert not stats.projected
    assert stats.unknowns == 64
    assert stats.residual <= 1e-13


def test_periodic_sine_mode():
    grid = Grid.unit_cell(1, 32)
    op = assemble(MatrixField.constant(grid, 1.0), bc=BoundaryCondition.periodic)
    x = grid.axis(0)
    u, stats = solve(op, source=ScalarField(grid, np.sin(2 * np.pi * x)), tol=1e-13)
    eigenvalue = (2 - 2 * np.cos(2 * np.pi * grid.h)) / grid.h**2
    np.testing.assert_allclose(u.values, np.sin(2 * np.pi * x) / eigenvalue, atol=1e-12)
    assert stats.projected
    assert abs(u.values.mean()) < 1e-14


def test_periodic_incompatible_source():
    grid = Grid.unit_cell(2, 8)
    op = assemble(MatrixField.constant(grid, 1.0), bc="periodic")
    with pytest.raises(Singular) as e:
        solve(op, source=ScalarField.constant(grid, 1.0))
    assert e.value.module == "elliptic_solver"


def test_not_elliptic():
    grid = Grid.unit_cell(1, 8)
    with pytest.raises(EllipticityViolation):
        assemble(MatrixField.constant(grid, 0.0))


def test_mask_needs_dirichlet():
    grid = Grid.unit_cell(1, 8)
    with pytest.raises(ValueError):
        assemble(MatrixField.constant(grid, 1.0), bc="periodic", mask=np.ones(8, dtype=bool))


def test_masked_unknowns():
    grid = Grid.centered(1, 2, 8)
    mask = grid.radii() < 0.75
    op = assemble(MatrixField.constant(grid, 1.0), mask=mask)
    assert op.unknowns == int(mask.sum())
    u, _ = solve(op, source=ScalarField.constant(grid, 1.0))
    assert np.all(u.values[~mask] == 0)
    assert np.all(u.values[mask] > 0)


def test_full_matrix_operator_is_symmetric():
    grid = Grid.unit_cell(2, 8)
    op = assemble(MatrixField.constant(grid, [[2.0, 0.5], [0.5, 1.0]]), bc="periodic")
    assert op.averaging == "arithmetic"
    assert op.corners.shape == (64, 4)
    assert abs(op.matrix - op.matrix.T).max() < 1e-14
    np.testing.assert_allclose(op.flux_integrals(np.zeros(grid.cells), [1.0, 0.0]), [2.0, 0.5])
    np.testing.assert_allclose(op.flux_integrals(np.zeros(grid.cells), [0.0, 1.0]), [0.5, 1.0])


def test_affine_part_of_constant_coefficient_is_divergence_free():
    grid = Grid.unit_cell(2, 8)
    op = assemble(MatrixField.constant(grid, [[2.0, 0.5], [0.5, 1.0]]), bc="periodic")
    np.testing.assert_allclose(op.apply_affine(np.zeros(grid.cells), [1.0, -2.0]), 0.0, atol=1e-12)


def test_laminate_affine_part():
    grid = Grid.unit_cell(2, 8)
    op = assemble(sample_field(Laminate(), grid), bc="periodic")
    assert op.averaging == "harmonic"
    along = op.apply_affine(np.zeros(grid.cells), [0.0, 1.0], include_boundary=False)
    across = op.apply_affine(np.zeros(grid.cells), [1.0, 0.0], include_boundary=False)
    np.testing.assert_allclose(along, 0.0, atol=1e-14)
    assert np.abs(across).max() > 0.1
    assert across.sum() == pytest.approx(0.0, abs=1e-12)


def test_gradient_norm():
    grid = Grid.box([0], [1], 4)
    op = assemble(MatrixField.constant(grid, 1.0))
    assert op.gradient_norm(np.zeros(4)) == 0.0
    # constant u: only the half-cells next to the two Dirichlet faces contribute
    u = np.array([1.0, 1.0, 1.0, 1.0])
    assert op.gradient_norm(u) == pytest.approx(np.sqrt(2 * (1 / 0.125) ** 2 * 0.5 * 0.25))
    assert op.gradient_norm(u, include_boundary=False) == 0.0


def test_iteration_cap():
    init(max_iterations=1)
    grid = Grid.box([0], [1], 64)
    op = assemble(MatrixField.constant(grid, 1.0))
    with pytest.raises(NoConvergence) as e:
        solve(op, source=ScalarField.constant(grid, 1.0))
    assert e.value.iterations == 1
