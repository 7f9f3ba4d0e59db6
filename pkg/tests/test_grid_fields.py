import math

import numpy as np
import pytest

from homoglab.coefficients import Laminate, PeriodicTrig, RadialLogOsc
from homoglab.exceptions import ConfigInvalid, EllipticityViolation, GridMisaligned, GridTooSmall, NonFinite
from homoglab.grid_fields import (
    EPS_ONE,
    EpsDescriptor,
    Grid,
    MatrixField,
    ScalarField,
    VectorField,
    check_uniform_ellipticity,
    periodic_extension,
    sample_field,
    sample_rescaled,
    unit_cell_block,
)


def test_grid_box():
    grid = Grid.box([0, -1], [1, 1], 8)
    assert grid.cells == (8, 16)
    assert grid.dim == 2
    assert grid.h == 0.125
    assert grid.size == 128
    assert grid.cell_volume == 0.125**2
    assert grid.upper == (1.0, 1.0)
    np.testing.assert_allclose(grid.axis(0), (np.arange(8) + 0.5) / 8)
    assert grid.centers().shape == (8, 16, 2)
    assert grid.to_dict() == {"origin": [0.0, -1.0], "cells": [8, 16], "cells_per_unit": 8}


def test_grid_misaligned():
    with pytest.raises(GridMisaligned):
        Grid.box([0], [1.05], 8)


@pytest.mark.parametrize(
    "origin,cells,cells_per_unit",
    [
        ((0.0, 0.0, 0.0), (2, 2, 2), 2),
        ((0.0,), (4, 4), 4),
        ((0.0,), (4,), 1),
        ((0.0,), (0,), 4),
    ],
)
def test_grid_invalid(origin, cells, cells_per_unit):
    with pytest.raises(GridTooSmall):
        Grid(origin, cells, cells_per_unit)


def test_lattice_offset():
    grid = Grid.centered(2, 2, 4)
    assert grid.origin == (-2.0, -2.0)
    assert grid.lattice_offset() == (8, 8)
    assert Grid.box([0.5], [2], 4).lattice_offset() == (-2,)
    with pytest.raises(GridMisaligned):
        Grid((0.1,), (4,), 4).lattice_offset()


def test_subgrid_and_block_start():
    grid = Grid.centered(2, 1, 4)
    assert grid.block_start([0.0]) == (8,)
    sub = grid.subgrid((8,), (4,))
    assert sub == Grid((0.0,), (4,), 4)
    assert grid.covers([-1], [1])
    assert not grid.covers([-3], [1])
    with pytest.raises(GridMisaligned):
        grid.block_start([0.1])


def test_field_values_are_readonly():
    grid = Grid.unit_cell(1, 4)
    values = np.arange(4.0)
    field = ScalarField(grid, values)
    values[0] = 10
    assert field.values[0] == 0
    with pytest.raises(ValueError):
        field.values[0] = 1


def test_field_checks():
    grid = Grid.unit_cell(1, 4)
    with pytest.raises(ValueError, match="shape"):
        ScalarField(grid, np.zeros(5))
    with pytest.raises(NonFinite):
        ScalarField(grid, [0, 1, math.nan, 0])
    with pytest.raises(ValueError, match="different grids"):
        ScalarField.zeros(grid) + ScalarField.zeros(Grid.unit_cell(1, 8))


def test_field_arithmetic():
    grid = Grid.unit_cell(2, 2)
    one = ScalarField.constant(grid, 1.0)
    two = 2 * one
    np.testing.assert_array_equal((two - one).values, np.ones((2, 2)))
    np.testing.assert_array_equal((two * -1).abs().values, np.full((2, 2), 2.0))


def test_vector_field():
    grid = Grid.unit_cell(2, 2)
    vector = VectorField.from_components([ScalarField.constant(grid, 3.0), ScalarField.constant(grid, 4.0)])
    assert vector.values.shape == (2, 2, 2)
    np.testing.assert_array_equal(vector.magnitude().values, np.full((2, 2), 5.0))
    np.testing.assert_array_equal(vector.component(1).values, np.full((2, 2), 4.0))


def test_matrix_field_symmetrized():
    grid = Grid.unit_cell(2, 2)
    field = MatrixField.constant(grid, [[2.0, 1.0], [0.0, 2.0]])
    np.testing.assert_array_equal(field.values[0, 0], [[2.0, 0.5], [0.5, 2.0]])
    assert not field.is_diagonal()
    assert MatrixField.constant(grid, 3.0).is_diagonal()
    lambda_min, lambda_max = check_uniform_ellipticity(field)
    assert lambda_min == pytest.approx(1.5)
    assert lambda_max == pytest.approx(2.5)


def test_matrix_field_apply():
    grid = Grid.unit_cell(2, 2)
    field = MatrixField.isotropic(ScalarField.constant(grid, 2.0))
    vector = VectorField(grid, np.ones((2, 2, 2)))
    np.testing.assert_array_equal(field.apply(vector).values, np.full((2, 2, 2), 2.0))


def test_periodic_extension():
    spec = Laminate(values=(1.0, 3.0), axis=0, fraction=0.25)
    cell = sample_field(spec, Grid.unit_cell(2, 8))
    big = Grid.centered(2, 2, 8)
    extended = periodic_extension(cell, big)
    np.testing.assert_array_equal(extended.values, sample_field(spec, big).values)


def test_periodic_extension_checks():
    cell = ScalarField.zeros(Grid.unit_cell(1, 8))
    with pytest.raises(GridMisaligned):
        periodic_extension(cell, Grid.centered(2, 1, 16))
    shifted = ScalarField.zeros(Grid((0.5,), (8,), 8))
    with pytest.raises(GridMisaligned):
        periodic_extension(shifted, Grid.centered(2, 1, 8))


def test_unit_cell_block():
    grid = Grid.centered(2, 2, 4)
    field = ScalarField(grid, grid.centers()[..., 0])
    block = unit_cell_block(field, (1, 0))
    assert block.grid == Grid((1.0, 0.0), (4, 4), 4)
    np.testing.assert_allclose(block.values[:, 0], 1 + (np.arange(4) + 0.5) / 4)
    with pytest.raises(GridTooSmall):
        unit_cell_block(field, (2, 0))


def test_sample_field_ellipticity():
    class Leaky:
        type = "leaky"
        ellipticity = 1.0

        def evaluate(self, points):
            return np.full(points.shape[:-1] + (1, 1), 0.5)

    with pytest.raises(EllipticityViolation) as e:
        sample_field(Leaky(), Grid.unit_cell(1, 4))
    assert e.value.lambda_min == 0.5
    assert e.value.floor == 1.0
    assert e.value.module == "grid_fields"


def test_sample_field_trig():
    field = sample_field(PeriodicTrig(base=2.0, terms=((1.0, (1,), 0.0),)), Grid.unit_cell(1, 4))
    np.testing.assert_allclose(field.values[:, 0, 0], 2 + np.sin(2 * np.pi * (np.arange(4) + 0.5) / 4))


def test_sample_rescaled_laminate():
    field = sample_rescaled(Laminate(), Grid.unit_cell(1, 8), EpsDescriptor.literal(0.25))
    np.testing.assert_array_equal(field.values[:, 0, 0], [1.0, 3.0] * 4)


def test_sample_rescaled_log_domain_matches_direct():
    grid = Grid.box((1.0,), (2.0,), 16)
    eps = EpsDescriptor.exp_sequence(1, 0.5)
    direct = sample_rescaled(RadialLogOsc(), grid, eps, log_domain=False)
    logged = sample_rescaled(RadialLogOsc(), grid, eps)
    np.testing.assert_allclose(logged.values, direct.values, atol=1e-9)


def test_eps_literal():
    eps = EpsDescriptor.literal(0.25)
    assert eps.value == pytest.approx(0.25)
    assert eps.neg_log == pytest.approx(math.log(4))
    assert not eps.is_sequence
    assert str(eps) == "eps=0.25"
    assert EPS_ONE.neg_log == 0
    assert EPS_ONE.log_neg_log == -math.inf


@pytest.mark.parametrize("value", [0, -0.5, 1.5])
def test_eps_literal_range(value):
    with pytest.raises(ConfigInvalid) as e:
        EpsDescriptor.literal(value)
    assert e.value.key == "eps"


def test_eps_exp_sequence():
    eps = EpsDescriptor.exp_sequence(2, 0.5)
    assert eps.is_sequence
    assert eps.neg_log == pytest.approx(4 * math.pi + 0.5)
    assert eps.neg_log_phase == 0.5
    assert eps.value == pytest.approx(math.exp(-4 * math.pi - 0.5))
    assert eps.to_dict() == {"form": "exp", "n": 2, "y": 0.5, "neg_log": eps.neg_log}
    with pytest.raises(ConfigInvalid):
        EpsDescriptor.exp_sequence(-1)
    with pytest.raises(ConfigInvalid):
        EpsDescriptor.exp_sequence(0, -1.0)


def test_eps_double_exp_sequence():
    eps = EpsDescriptor.double_exp_sequence(2)
    assert eps.log_neg_log == pytest.approx(4 * math.pi)
    assert eps.log_neg_log_phase == 0.0
    assert eps.value == 0.0
    assert str(eps) == "eps[double_exp](n=2, rate=6.28319, offset=0)"

    shifted = EpsDescriptor.double_exp_sequence(1, offset=math.pi / 2)
    assert shifted.log_neg_log_phase == math.pi / 2
