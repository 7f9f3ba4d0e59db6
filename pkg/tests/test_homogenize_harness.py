import math

import numpy as np
import pytest

from homoglab.coefficients import Constant, Laminate, PerturbedPeriodic, RadialLogOsc
from homoglab.corrector import solve_cell_problem
from homoglab.domains import Box, ConstantSource, Interval
from homoglab.exceptions import (
    ConfigInvalid,
    DegenerateFitWarning,
    DomainTooSmall,
    ExponentOutOfRange,
    InsufficientPoints,
    NonFinite,
    ResolutionInsufficient,
    ResolutionMismatch,
)
from homoglab.grid_fields import EPS_ONE, EpsDescriptor, Grid, sample_field
from homoglab.homogenize_harness import (
    counterexample_1d,
    counterexample_2d,
    eps_sweep,
    first_order_approx,
    harmonic_mean,
    periodic_background,
    phase_family,
    quadrature_solve,
    reference_rates,
    remainder_rates,
    solve_eps_problem,
)


def test_harmonic_mean_laminate():
    assert harmonic_mean(Laminate()) == pytest.approx(1.5, rel=1e-12)


def test_quadrature_solve_constant_coefficient():
    x = Interval().grid(8).axis(0)
    u, du, nodes = quadrature_solve(np.ones_like, ConstantSource(1.0), 0.0, 1.0, x)
    np.testing.assert_allclose(u, x * (1 - x) / 2, atol=1e-13)
    np.testing.assert_allclose(du, 0.5 - x, atol=1e-13)
    assert nodes > 0


def test_solve_eps_problem_constant():
    solution = solve_eps_problem(Constant(1.0), EPS_ONE, Interval(), ConstantSource(1.0), cells_per_unit=16)
    x = solution.grid.axis(0)
    assert solution.method == "quadrature"
    assert solution.mask is None
    np.testing.assert_allclose(solution.u.values, x * (1 - x) / 2, atol=1e-12)
    # ‖f‖·C_P/λ with C_P = 1/π on the unit interval
    assert solution.energy_bound == pytest.approx(1 / math.pi)
    assert solution.to_dict()["method"] == "quadrature"


def test_laminate_approaches_harmonic_limit():
    def distance(eps):
        u_eps = solve_eps_problem(Laminate(), EpsDescriptor.literal(eps), cells_per_unit=256)
        u_star = solve_eps_problem(Constant(1.5), EPS_ONE, cells_per_unit=256)
        return u_eps.l2_distance(u_star)

    coarse, fine = distance(1 / 16), distance(1 / 32)
    assert coarse < 0.01
    assert fine < coarse


def test_solve_eps_problem_errors():
    with pytest.raises(ConfigInvalid) as e:
        solve_eps_problem(Constant(1.0), EPS_ONE, Box(), method="quadrature")
    assert e.value.key == "solver.method"
    assert e.value.module == "homogenize_harness"

    with pytest.raises(ConfigInvalid, match="unknown method 'spectral'"):
        solve_eps_problem(Constant(1.0), EPS_ONE, Interval(), method="spectral")

    with pytest.raises(ResolutionInsufficient):
        solve_eps_problem(Laminate(), EpsDescriptor.literal(0.25), Box(), cells_per_unit=16)


@pytest.mark.parametrize(
    "p,d,alpha,expected",
    [
        (1.5, 2, 0.5, (1 / 3, 2 / 26, 26.0)),
        (0.75, 1, 0.5, (1 / 3, 1 / 7, 7.0)),
        (0.5, 2, 0.5, (1.0, None, None)),
        (0.7, 2, 1.0, (1.0, 1.0, 1.4 / 1.3 * 3 - 2)),
    ],
)
def test_reference_rates(p, d, alpha, expected):
    mu, nu, q = reference_rates(p, d, alpha)
    assert mu == pytest.approx(expected[0])
    if expected[1] is None:
        assert nu is None and q is None
    else:
        assert nu == pytest.approx(expected[1])
        assert q == pytest.approx(expected[2])


@pytest.mark.parametrize("p,d", [(1.0, 2), (2.0, 2), (0.0, 1), (3.0, 2)])
def test_reference_rates_out_of_range(p, d):
    with pytest.raises(ExponentOutOfRange):
        reference_rates(p, d)


def test_remainder_rates_power_laws():
    eps = np.array([1 / 8, 1 / 2, 1 / 16, 1 / 4])
    report = remainder_rates(eps, 3 * eps, np.sqrt(eps), 1.5, 2)
    assert report.eps_list == [1 / 2, 1 / 4, 1 / 8, 1 / 16]
    assert report.l2_error == pytest.approx([1.5, 0.75, 0.375, 0.1875])
    slopes = {fit.quantity: fit for fit in report.slopes}
    assert list(slopes) == ["l2_error", "grad_remainder_l2"]
    assert slopes["l2_error"].slope == pytest.approx(1.0)
    assert slopes["l2_error"].intercept == pytest.approx(math.log(3))
    assert slopes["l2_error"].stderr == pytest.approx(0, abs=1e-6)
    assert slopes["grad_remainder_l2"].slope == pytest.approx(0.5)
    assert slopes["grad_remainder_l2"].points == 4
    assert report.mu == pytest.approx(1 / 3)
    assert report.reference == "mu"
    assert report.branches == {"mu": "d/p*", "nu": "d/q"}
    assert slopes["l2_error"].reference == "mu"
    assert slopes["grad_remainder_l2"].reference_rate == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    "p,d,alpha,branches",
    [
        (1.5, 2, 0.5, {"mu": "d/p*", "nu": "d/q"}),
        (0.7, 2, 1.0, {"mu": "1", "nu": "1"}),
        (0.5, 2, 0.5, {"mu": "1", "nu": None}),
    ],
)
def test_remainder_rates_reports_lr_reference(p, d, alpha, branches):
    eps = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    report = remainder_rates(eps, eps, eps, p, d, alpha=alpha, grad_remainder_lr=eps)
    mu, nu, _ = reference_rates(p, d, alpha)
    assert report.reference == "nu"
    assert report.branches == branches
    fits = {fit.quantity: fit for fit in report.slopes}
    assert fits["l2_error"].reference == "mu"
    assert fits["l2_error"].reference_rate == mu
    assert fits["grad_remainder_lr"].reference == "nu"
    assert fits["grad_remainder_lr"].reference_rate == nu
    assert report.to_dict()["slopes"][-1]["reference"] == "nu"


def test_remainder_rates_lr_defaults_to_two():
    eps = [1 / 2, 1 / 4, 1 / 8, 1 / 16]
    report = remainder_rates(eps, eps, eps, 0.75, 1, grad_remainder_lr=eps)
    assert report.r == 2.0
    assert [fit.quantity for fit in report.slopes][-1] == "grad_remainder_lr"


def test_remainder_rates_degenerate():
    eps = [1 / 2, 1 / 4, 1 / 8, 1 / 16]
    with pytest.warns(DegenerateFitWarning):
        report = remainder_rates(eps, [0.0, 0.0, 0.0, 0.0], eps, 0.75, 1)
    assert math.isnan(report.slopes[0].slope)
    assert report.slopes[1].slope == pytest.approx(1.0)


def test_remainder_rates_checks():
    with pytest.raises(InsufficientPoints):
        remainder_rates([0.5, 0.25, 0.125], [1, 1, 1], [1, 1, 1], 0.75, 1)
    with pytest.raises(ConfigInvalid) as e:
        remainder_rates([0.5, 0.25, 0.25, 0.125], [1, 2, 3, 4], [1, 2, 3, 4], 0.75, 1)
    assert e.value.key == "eps"


def test_periodic_background():
    assert periodic_background(PerturbedPeriodic(periodic=Laminate())) == Laminate()
    assert periodic_background(Laminate(axis=1)) == Laminate(axis=1)
    with pytest.raises(ConfigInvalid) as e:
        periodic_background(RadialLogOsc())
    assert e.value.key == "coefficient.type"


@pytest.fixture
def laminate_correctors():
    correctors, a_star = solve_cell_problem(sample_field(Laminate(), Grid.unit_cell(1, 32)))
    return correctors


def test_first_order_approx_captures_gradient_oscillation(laminate_correctors):
    eps = EpsDescriptor.literal(1 / 16)
    u_eps = solve_eps_problem(Laminate(), eps, cells_per_unit=256)
    u_star = solve_eps_problem(Constant(1.5), EPS_ONE, cells_per_unit=256)
    approximation = first_order_approx(u_star, laminate_correctors, eps, u_eps=u_eps)

    grid = u_eps.grid
    oscillation = np.sqrt(np.sum((u_eps.gradient.values - u_star.gradient.values) ** 2) * grid.cell_volume)
    remainder = np.sqrt(np.sum(approximation.grad_remainder.values**2) * grid.cell_volume)
    assert remainder < 0.2 * oscillation
    assert approximation.remainder.values.shape == grid.cells


def test_first_order_approx_checks(laminate_correctors):
    u_star = solve_eps_problem(Constant(1.5), EPS_ONE, cells_per_unit=16)
    with pytest.raises(ResolutionMismatch, match="one corrector per direction"):
        first_order_approx(u_star, [], EpsDescriptor.literal(0.25))

    other = solve_eps_problem(Constant(1.5), EPS_ONE, cells_per_unit=32)
    with pytest.raises(ResolutionMismatch):
        first_order_approx(u_star, laminate_correctors, EpsDescriptor.literal(0.25), u_eps=other)

    with pytest.raises(NonFinite, match="underflows"):
        first_order_approx(u_star, laminate_correctors, EpsDescriptor.exp_sequence(200, 0.5))


def test_eps_sweep_report():
    report = eps_sweep(Laminate(), [1 / 8, 1 / 4, 1 / 16, 1 / 32], 0.75, cell_resolution=64, r=2.0)
    assert report.eps_list == [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    assert len(report.l2_error) == 4
    assert all(value > 0 for value in report.l2_error)
    assert [fit.quantity for fit in report.slopes] == ["l2_error", "grad_remainder_l2", "grad_remainder_lr"]
    assert report.mu == pytest.approx(1 / 3)
    assert report.r == 2.0
    assert report.additional_properties["a_star"]["matrix"] == [[pytest.approx(1.5)]]


def test_counterexample_1d_subsequence_converges():
    report = counterexample_1d([0, 1, 2], cells_per_unit=64)
    assert report.branch == "y=0"
    assert report.n_list == [0, 1, 2]
    assert report.distances[0] > report.distances[1] > report.distances[2]
    assert report.distances[2] < 1e-5
    # |sin(ln(x + ε)) - sin(ln x)| <= ε on (1, 2)
    assert report.deviations[1] < math.exp(-2 * math.pi)
    assert report.deviations[2] < math.exp(-4 * math.pi)
    assert report.cross_branch_distance > 1e-3
    assert report.limit_norm > report.cross_branch_distance


def test_counterexample_1d_branches_are_symmetric():
    first = counterexample_1d([1], cells_per_unit=64)
    second = counterexample_1d([1], y=math.pi, cells_per_unit=64)
    assert second.cross_branch_distance == pytest.approx(first.cross_branch_distance, rel=1e-6)
    assert second.phase == pytest.approx(math.pi)


def test_counterexample_1d_checks():
    with pytest.raises(ConfigInvalid) as e:
        counterexample_1d([9])
    assert e.value.key == "eps.n"
    with pytest.raises(DomainTooSmall):
        counterexample_1d([1], domain=Interval(0.0, 1.0))


def test_phase_family():
    family = phase_family(phases=(0.0, math.pi), cells_per_unit=64)
    reference = counterexample_1d([0], cells_per_unit=64)
    assert family.distances[0][0] == 0
    assert family.distances[0][1] == pytest.approx(family.distances[1][0])
    assert family.distances[0][1] == pytest.approx(reference.cross_branch_distance, rel=1e-9)
    assert family.limit_norms[0] == pytest.approx(reference.limit_norm, rel=1e-9)
    assert family.to_dict()["phases"] == [0.0, math.pi]


def test_counterexample_2d_needs_resolution():
    with pytest.raises(ResolutionInsufficient, match="at least 64"):
        counterexample_2d([1], cells_per_unit=32)
