import math

import numpy as np
import pytest

from homoglab import coefficient_from_config
from homoglab.coefficients import (
    Constant,
    Laminate,
    PerturbedPeriodic,
    PeriodicTrig,
    RadialIterLogOsc,
    RadialLogOsc,
    Tabulated,
)
from homoglab.exceptions import ConfigInvalid, DomainTooSmall, EllipticityViolation
from homoglab.grid_fields import EpsDescriptor, Grid, sample_field


@pytest.mark.parametrize(
    "table,expected",
    [
        ({"type": "constant", "value": 2}, Constant(2.0)),
        ({"type": "laminate", "values": [1, 4], "axis": 1}, Laminate(values=(1.0, 4.0), axis=1)),
        ({"type": "radial_log_osc", "base": 3}, RadialLogOsc(base=3.0)),
        (
            {"type": "periodic_trig", "terms": [{"amplitude": 0.5, "frequency": [1, 1]}]},
            PeriodicTrig(terms=((0.5, (1, 1), 0.0),)),
        ),
    ],
)
def test_from_config(table, expected):
    assert coefficient_from_config(table) == expected


def test_from_config_errors():
    with pytest.raises(ConfigInvalid) as e:
        coefficient_from_config({"base": 2})
    assert e.value.key == "coefficient.type"
    with pytest.raises(ConfigInvalid, match="unknown coefficient type 'foo'"):
        coefficient_from_config({"type": "foo"})
    with pytest.raises(ConfigInvalid, match="unknown key"):
        coefficient_from_config({"type": "laminate", "colour": "red"})


def test_to_config_round_trip():
    spec = PerturbedPeriodic(periodic=Laminate(), amplitude=0.25, center=[1, 0], profile="bump")
    table = spec.to_config()
    assert table["periodic"]["type"] == "laminate"
    assert coefficient_from_config(table) == spec


def test_ellipticity_checked_on_construction():
    with pytest.raises(EllipticityViolation):
        RadialLogOsc(base=1.0, amplitude=1.0)
    with pytest.raises(EllipticityViolation):
        Laminate(values=(0.0, 1.0))
    with pytest.raises(ConfigInvalid):
        Laminate(values=(1.0, 2.0, 3.0))


def test_constant_matrix():
    spec = Constant([[2.0, 0.5], [0.5, 1.0]])
    values = spec.evaluate(np.zeros((3, 2)))
    assert values.shape == (3, 2, 2)
    assert spec.ellipticity == pytest.approx(1.5 - math.sqrt(0.5))
    with pytest.raises(ConfigInvalid):
        spec.evaluate(np.zeros((3, 1)))
    with pytest.raises(ConfigInvalid):
        Constant([[2.0, 1.0], [0.0, 2.0]])


def test_laminate_evaluate():
    spec = Laminate(values=(1.0, 3.0), axis=1, fraction=0.5)
    points = np.array([[0.7, 0.25], [0.2, 0.75], [0.0, 1.25]])
    np.testing.assert_array_equal(spec.evaluate(points)[:, 0, 0], [1.0, 3.0, 1.0])
    with pytest.raises(ConfigInvalid):
        spec.evaluate(np.zeros((1, 1)))


def test_periodic_trig_bounds():
    spec = PeriodicTrig(base=3.0, terms=((1.0, (1,), 0.0), (-0.5, (0, 2), 1.0)))
    assert spec.ellipticity == 1.5
    assert spec.upper_bound == 4.5
    values = spec.evaluate(np.random.default_rng(0).uniform(-3, 3, size=(50, 2)))
    assert values[..., 0, 0].min() >= 1.5
    np.testing.assert_array_equal(values[..., 0, 1], 0)


def test_radial_log_osc_log_domain_matches_direct():
    spec = RadialLogOsc()
    points = np.linspace(0, 2, 41)[:, None]
    eps = EpsDescriptor.literal(0.01)
    np.testing.assert_allclose(
        spec.evaluate_rescaled(points, eps, log_domain=True),
        spec.evaluate_rescaled(points, eps, log_domain=False),
        rtol=0,
        atol=1e-12,
    )


def test_radial_log_osc_sequence_matches_literal():
    spec = RadialLogOsc()
    points = np.linspace(0.05, 2, 40)[:, None]
    sequence = EpsDescriptor.exp_sequence(1, 0.3)
    literal = EpsDescriptor.literal(math.exp(-2 * math.pi - 0.3))
    np.testing.assert_allclose(
        spec.evaluate_rescaled(points, sequence), spec.evaluate_rescaled(points, literal), rtol=0, atol=1e-9
    )


def test_radial_log_osc_underflowing_eps():
    spec = RadialLogOsc()
    points = np.array([[1.0], [math.e]])
    values = spec.evaluate_rescaled(points, EpsDescriptor.exp_sequence(200, 0.5))
    # ln(1 + r/ε) ≡ ln r + 0.5 modulo 2π for r ≫ ε
    np.testing.assert_allclose(values[:, 0, 0], [2 + math.sin(0.5), 2 + math.sin(1.5)], atol=1e-12)


def test_radial_iter_log_osc_log_domain_matches_direct():
    spec = RadialIterLogOsc()
    points = np.array([[0.0, 0.0], [0.3, 0.4], [1.0, 1.0], [0.01, 0.0]])
    eps = EpsDescriptor.literal(0.01)
    np.testing.assert_allclose(
        spec.evaluate_rescaled(points, eps, log_domain=True),
        spec.evaluate_rescaled(points, eps, log_domain=False),
        rtol=0,
        atol=1e-12,
    )


def test_radial_iter_log_osc_double_exp():
    spec = RadialIterLogOsc()
    values = spec.evaluate_rescaled(np.array([[1.0, 0.0]]), EpsDescriptor.double_exp_sequence(3, offset=0.5))
    # ln(1 + ln(1 + 1/ε)) → ln(-ln ε) = 6π + 0.5
    assert values[0, 0, 0] == pytest.approx(2 + math.sin(0.5), abs=1e-6)


def test_perturbed_periodic_profiles():
    algebraic = PerturbedPeriodic(amplitude=0.5, width=1.0, decay=2.0)
    points = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    np.testing.assert_allclose(algebraic.perturbation(points), [0.5, 0.125, 0.5 / 16])

    bump = PerturbedPeriodic(amplitude=-0.5, width=2.0, profile="bump")
    assert bump.ellipticity == 0.5
    np.testing.assert_allclose(bump.perturbation(points), [-0.5, -0.5 * math.exp(1 - 1 / 0.75), 0.0])


def test_perturbed_periodic_invalid():
    with pytest.raises(ConfigInvalid) as e:
        PerturbedPeriodic(periodic=RadialLogOsc())
    assert e.value.key == "coefficient.periodic"
    with pytest.raises(ConfigInvalid):
        PerturbedPeriodic(profile="gaussian")
    with pytest.raises(ConfigInvalid):
        PerturbedPeriodic(width=0)


def test_tabulated_periodic():
    field = sample_field(Laminate(fraction=0.25), Grid.unit_cell(2, 8))
    spec = Tabulated(field=field, periodic=True)
    assert spec.has_unit_period
    assert spec.ellipticity == 1.0
    points = Grid.centered(1, 2, 8).centers()
    np.testing.assert_array_equal(spec.evaluate(points), Laminate(fraction=0.25).evaluate(points))


def test_tabulated_outside():
    field = sample_field(Constant(1.0), Grid.unit_cell(1, 4))
    spec = Tabulated(field=field)
    with pytest.raises(DomainTooSmall):
        spec.evaluate(np.array([[1.5]]))
    with pytest.raises(ConfigInvalid):
        Tabulated()
