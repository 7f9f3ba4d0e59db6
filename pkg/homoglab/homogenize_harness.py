"""ε-problems, their homogenized limits, convergence rates and the two non-homogenizable counter-examples.

One-dimensional problems on an interval (x0, x1) are solved exactly: with F(x) = ∫_{x0}^x f,

    u(x) = ∫_{x0}^x (C - F(t)) / a(t/ε) dt,    C = ∫ F/a / ∫ 1/a,

so that -(a u')' = f and u(x0) = u(x1) = 0. The integrals use composite Gauss-Legendre panels doubled until the
cumulative values settle. Two-dimensional problems go through the finite-volume solver.
"""
import logging
import math
import warnings
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import attrs
import numpy as np
from numpy.polynomial.legendre import leggauss

from homoglab.coefficients import Coefficient, Constant, PerturbedPeriodic, RadialIterLogOsc, RadialLogOsc
from homoglab.corrector import (
    CorrectorSolution,
    cell_gradient,
    face_gradients,
    periodic_interpolate,
    solve_cell_problem,
)
from homoglab.decorators import track
from homoglab.discrete_calculus import lp_norm
from homoglab.domains import Annulus, ConstantSource, Domain, Interval, Source, l2_on, masked_values
from homoglab.elliptic_solver import BoundaryCondition, assemble, solve
from homoglab.exceptions import (
    ConfigInvalid,
    DegenerateFitWarning,
    DomainTooSmall,
    ExponentOutOfRange,
    InsufficientPoints,
    NonFinite,
    QuadratureFailure,
    ResolutionInsufficient,
    ResolutionMismatch,
)
from homoglab.grid_fields import EPS_ONE, EpsDescriptor, Grid, ScalarField, VectorField, sample_field, sample_rescaled
from homoglab.internal.models import HomogenizedTensor, SlopeFit, SolveStats, SubsequenceReport, SweepReport
from homoglab.lab import map_jobs
from homoglab.periodic_extraction import holder_lebesgue_exponent

log = logging.getLogger("homoglab")

GAUSS_ORDER = 8
QUADRATURE_TOL = 1e-12
MAX_QUADRATURE_NODES = 1 << 22
MIN_CELLS_PER_PERIOD = 8
DEFAULT_CELLS_1D = 1024
DEFAULT_CELLS_2D = 64
ANNULUS_MIN_RESOLUTION = 64
MIN_SWEEP_POINTS = 4
# the L² error and the L² gradient remainder follow μ; the L^r gradient remainder follows ν
FIT_REFERENCES = {"l2_error": "mu", "grad_remainder_l2": "mu", "grad_remainder_lr": "nu"}


@attrs.define(eq=False)
class EpsSolution:
    """u^ε sampled at the cell centers of ``grid`` together with its gradient."""

    domain: Domain
    eps: EpsDescriptor
    grid: Grid
    u: ScalarField
    gradient: VectorField
    method: str
    mask: Optional[np.ndarray] = None
    stats: Optional[SolveStats] = None
    quadrature_nodes: Optional[int] = None
    grad_l2: float = 0.0
    energy_bound: float = 0.0

    def l2_norm(self, mask: Optional[np.ndarray] = None) -> float:
        return l2_on(self.u.values, self.grid, self._mask(mask))

    def l2_distance(self, other: "EpsSolution", mask: Optional[np.ndarray] = None) -> float:
        if other.grid != self.grid:
            raise ResolutionMismatch(f"Solutions live on {self.grid} and {other.grid}")
        return l2_on(self.u.values - other.u.values, self.grid, self._mask(mask))

    def _mask(self, mask):
        if mask is None:
            return self.mask
        if self.mask is None:
            return mask
        return mask & self.mask

    def to_dict(self):
        result = {
            "eps": self.eps.to_dict(),
            "domain": self.domain.to_config(),
            "grid": self.grid.to_dict(),
            "method": self.method,
            "l2_norm": self.l2_norm(),
            "grad_l2": self.grad_l2,
            "energy_bound": self.energy_bound,
        }
        if self.stats is not None:
            result["stats"] = self.stats.to_dict()
        if self.quadrature_nodes is not None:
            result["quadrature_nodes"] = self.quadrature_nodes
        return result


@attrs.define(eq=False)
class FirstOrderApproximation:
    """u^{ε,1} = u* + ε Σ_i ∂_i u* w_i(x/ε) and, when u^ε is known, the remainder R^ε = u^ε - u^{ε,1}."""

    u1: ScalarField
    grad_u1: VectorField
    remainder: Optional[ScalarField] = None
    grad_remainder: Optional[VectorField] = None


def _oscillates(spec: Coefficient) -> bool:
    return spec.has_unit_period and not isinstance(spec, Constant)


def _resolution(spec: Coefficient, eps: EpsDescriptor, dim: int, cells_per_unit: Optional[int]) -> int:
    if cells_per_unit is not None:
        return int(cells_per_unit)
    base = DEFAULT_CELLS_1D if dim == 1 else DEFAULT_CELLS_2D
    if _oscillates(spec) and eps.value > 0:
        needed = 2 ** math.ceil(math.log2(2 * MIN_CELLS_PER_PERIOD / eps.value))
        return max(base, needed)
    return base


def _cumulative(integrand: Callable[[np.ndarray], List[np.ndarray]], breakpoints: np.ndarray, panels: int):
    nodes, weights = leggauss(GAUSS_ORDER)
    left = breakpoints[:-1]
    width = np.diff(breakpoints)
    fractions = np.arange(panels) / panels
    panel_left = left[:, None] + width[:, None] * fractions[None, :]
    panel_width = width[:, None] / panels
    x = panel_left[..., None] + 0.5 * (nodes + 1.0) * panel_width[..., None]
    w = 0.5 * weights * panel_width[..., None]
    totals = []
    for values in integrand(x):
        per_interval = np.sum(values * w, axis=(1, 2))
        totals.append(np.concatenate([[0.0], np.cumsum(per_interval)]))
    return np.array(totals)


def _settled_cumulative(integrand, breakpoints: np.ndarray, panels: int, tol: float):
    """Cumulative integrals at the breakpoints, doubling the panels per interval until they stop changing."""
    previous = _cumulative(integrand, breakpoints, panels)
    while True:
        panels *= 2
        nodes = (breakpoints.size - 1) * panels * GAUSS_ORDER
        if nodes > MAX_QUADRATURE_NODES:
            raise QuadratureFailure(f"Quadrature did not settle within {MAX_QUADRATURE_NODES} nodes")
        current = _cumulative(integrand, breakpoints, panels)
        if not np.all(np.isfinite(current)):
            raise NonFinite("Quadrature produced non-finite values")
        change = np.max(np.abs(current - previous), axis=1)
        scale = np.max(np.abs(current), axis=1)
        if np.all(change <= tol * np.maximum(scale, 1e-300)):
            log.debug("quadrature settled with %d panels per interval (%d nodes)", panels, nodes)
            return current, nodes
        previous = current


def integrate(fn: Callable[[np.ndarray], np.ndarray], lower: float, upper: float, tol: float = QUADRATURE_TOL) -> float:
    values, _ = _settled_cumulative(lambda x: [fn(x)], np.array([lower, upper], dtype=float), 1, tol)
    return float(values[0, -1])


def harmonic_mean(spec: Coefficient) -> float:
    """(∫_0^1 1/a)^{-1}, the exact homogenized coefficient of a one-dimensional periodic medium."""
    return 1.0 / integrate(lambda t: 1.0 / spec.evaluate(t[..., None])[..., 0, 0], 0.0, 1.0)


def quadrature_solve(
    inverse_a: Callable[[np.ndarray], np.ndarray],
    source: Source,
    lower: float,
    upper: float,
    points: np.ndarray,
    max_panel: Optional[float] = None,
    tol: float = QUADRATURE_TOL,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """u and u' at ``points`` (sorted, inside (lower, upper)) for -(a u')' = f with u(lower) = u(upper) = 0.

    Returns ``(u, du, nodes)`` where ``nodes`` is the number of quadrature nodes of the accepted rule.
    """
    breakpoints = np.concatenate([[lower], np.asarray(points, dtype=float), [upper]])

    def integrand(x):
        inverse = inverse_a(x)
        return [inverse, source.primitive(x, lower) * inverse]

    panels = 1
    if max_panel is not None:
        panels = max(1, math.ceil(float(np.max(np.diff(breakpoints))) / max_panel))
    (first, second), nodes = _settled_cumulative(integrand, breakpoints, panels, tol)
    constant = second[-1] / first[-1]
    u = constant * first[1:-1] - second[1:-1]
    du = (constant - source.primitive(np.asarray(points, dtype=float), lower)) * inverse_a(np.asarray(points))
    return u, du, nodes


def _inverse_rescaled(spec: Coefficient, eps: EpsDescriptor, log_domain: Optional[bool]):
    def inverse(t):
        values = spec.evaluate_rescaled(np.asarray(t, dtype=float)[..., None], eps, log_domain=log_domain)
        return 1.0 / values[..., 0, 0]

    return inverse


def _energy_bound(spec: Coefficient, domain: Domain, source: Source, grid: Grid, mask) -> float:
    f = masked_values(np.broadcast_to(source.evaluate(grid.centers()), grid.cells), mask)
    return l2_on(f, grid) * domain.poincare_constant(grid.h) / spec.ellipticity


@track(module="homogenize_harness")
def solve_eps_problem(
    spec: Coefficient,
    eps: EpsDescriptor,
    domain: Optional[Domain] = None,
    source: Optional[Source] = None,
    cells_per_unit: Optional[int] = None,
    method: Optional[str] = None,
    log_domain: Optional[bool] = None,
) -> EpsSolution:
    """Solve -div(a(x/ε)∇u) = f in Ω with u = 0 on ∂Ω.

    ``method`` is ``quadrature`` (exact, default in one dimension) or ``finite_volume`` (default in two). Finite
    volumes need at least 8 cells per period of an oscillating periodic coefficient.
    """
    domain = domain or Interval()
    source = source or ConstantSource(1.0)
    method = method or ("quadrature" if domain.dim == 1 else "finite_volume")
    n = _resolution(spec, eps, domain.dim, cells_per_unit)
    grid = domain.grid(n)

    if method == "quadrature":
        if domain.dim != 1:
            raise ConfigInvalid("the quadrature solver is one-dimensional", key="solver.method")
        max_panel = eps.value / MIN_CELLS_PER_PERIOD if _oscillates(spec) else None
        if max_panel == 0:
            raise QuadratureFailure(f"{spec.type} oscillates on the scale {eps}, which cannot be resolved")
        x = grid.axis(0)
        u, du, nodes = quadrature_solve(
            _inverse_rescaled(spec, eps, log_domain), source, domain.lower, domain.upper, x, max_panel=max_panel
        )
        return EpsSolution(
            domain=domain,
            eps=eps,
            grid=grid,
            u=ScalarField(grid, u),
            gradient=VectorField(grid, du[:, None]),
            method=method,
            quadrature_nodes=nodes,
            grad_l2=l2_on(du, grid),
            energy_bound=_energy_bound(spec, domain, source, grid, None),
        )

    if method != "finite_volume":
        raise ConfigInvalid(f"unknown method '{method}'", key="solver.method")
    if _oscillates(spec) and n * eps.value < MIN_CELLS_PER_PERIOD:
        raise ResolutionInsufficient(
            f"{n} cells per unit give {n * eps.value:.3g} cells per period at {eps}; need {MIN_CELLS_PER_PERIOD}"
        )
    mask = domain.mask(grid)
    a = sample_rescaled(spec, grid, eps, log_domain=log_domain)
    f = ScalarField(grid, masked_values(np.broadcast_to(source.evaluate(grid.centers()), grid.cells), mask))
    op = assemble(a, grid, bc=BoundaryCondition.dirichlet, mask=mask)
    u, stats = solve(op, source=f)
    return EpsSolution(
        domain=domain,
        eps=eps,
        grid=grid,
        u=u,
        gradient=cell_gradient(u),
        method=method,
        mask=mask,
        stats=stats,
        grad_l2=op.gradient_norm(u.values),
        energy_bound=_energy_bound(spec, domain, source, grid, mask),
    )


def homogenized_problem(
    a_star: HomogenizedTensor,
    domain: Optional[Domain] = None,
    source: Optional[Source] = None,
    cells_per_unit: Optional[int] = None,
    method: Optional[str] = None,
) -> EpsSolution:
    """u* for the constant homogenized tensor, on the same grid as the ε-problems at ``cells_per_unit``."""
    matrix = np.asarray(a_star.matrix, dtype=float)
    value = float(matrix[0, 0]) if matrix.shape == (1, 1) else matrix.tolist()
    return solve_eps_problem(Constant(value), EPS_ONE, domain, source, cells_per_unit, method)


@track(module="homogenize_harness")
def first_order_approx(
    u_star: EpsSolution,
    correctors: Sequence[CorrectorSolution],
    eps: EpsDescriptor,
    grid: Optional[Grid] = None,
    u_eps: Optional[EpsSolution] = None,
) -> FirstOrderApproximation:
    """Two-scale approximation u^{ε,1} and the remainder R^ε.

    Corrector values at x/ε are periodic linear interpolants of w_per; their gradients come from the face
    differences of w_per, so ∇u^{ε,1} = ∇u*(I + ∇w(x/ε)) + ε ∇²u* w(x/ε) is assembled without differentiating
    the interpolant.
    """
    grid = grid or u_star.grid
    if u_star.grid != grid:
        raise ResolutionMismatch(f"u* lives on {u_star.grid}, expected {grid}")
    if u_eps is not None and u_eps.grid != grid:
        raise ResolutionMismatch(f"u^ε lives on {u_eps.grid}, expected {grid}")
    d = grid.dim
    by_direction = {c.direction: c for c in correctors if isinstance(c.direction, (int, np.integer))}
    if sorted(by_direction) != list(range(d)):
        raise ResolutionMismatch(f"first_order_approx needs one corrector per direction, got {sorted(by_direction)}")
    eps_value = eps.value
    if not eps_value > 0:
        raise NonFinite(f"{eps} underflows; the two-scale expansion needs a representable ε")

    y = grid.centers() / eps_value
    cell_offsets = (0.5,) * d
    w = []
    grad_w = []
    for i in range(d):
        w_per = by_direction[i].w_per
        w.append(periodic_interpolate(w_per.values, y, cell_offsets))
        faces = face_gradients(w_per)
        grad_w.append(
            [
                periodic_interpolate(faces[k], y, tuple(0.0 if axis == k else 0.5 for axis in range(d)))
                for k in range(d)
            ]
        )

    du = u_star.gradient.values
    hessian = [
        [np.gradient(du[..., i], grid.h, axis=k) if grid.cells[k] > 1 else np.zeros(grid.cells) for k in range(d)]
        for i in range(d)
    ]
    u1 = u_star.u.values + eps_value * sum(du[..., i] * w[i] for i in range(d))
    grad_u1 = np.stack(
        [
            du[..., k]
            + sum(du[..., i] * grad_w[i][k] for i in range(d))
            + eps_value * sum(hessian[i][k] * w[i] for i in range(d))
            for k in range(d)
        ],
        axis=-1,
    )
    mask = u_star.mask
    u1 = masked_values(u1, mask)
    if mask is not None:
        grad_u1 = np.where(mask[..., None], grad_u1, 0.0)
    approximation = FirstOrderApproximation(ScalarField(grid, u1), VectorField(grid, grad_u1))
    if u_eps is not None:
        approximation.remainder = ScalarField(grid, u_eps.u.values - u1)
        approximation.grad_remainder = VectorField(grid, u_eps.gradient.values - grad_u1)
    return approximation


@track(module="homogenize_harness")
def reference_rates(p: float, d: int, alpha: float = 0.5) -> Tuple[float, Optional[float], Optional[float]]:
    """(μ, ν, q): μ = d/p* for p > d/2 and 1 for p < d/2; ν = d/q for q > d and 1 for q < d.

    q is the Lebesgue exponent of the Hölder-A^{p*} inclusion. p = d/2 and p >= d are rejected; ν and q are None
    when p* < 1 or q = d.
    """
    if not 0 < p < d:
        raise ExponentOutOfRange(f"the rate formulas need 0 < p < d, got p={p}, d={d}")
    if p == d / 2:
        raise ExponentOutOfRange(f"p = d/2 = {p} lies on neither branch of the rate formula")
    p_star = p * d / (d - p)
    mu = d / p_star if p > d / 2 else 1.0
    if p_star < 1:
        return mu, None, None
    q = holder_lebesgue_exponent(p_star, alpha, d)
    if q > d:
        nu = d / q
    elif q < d:
        nu = 1.0
    else:
        nu = None
    return mu, nu, q


def rate_branches(p: float, d: int, q: Optional[float]) -> Dict[str, Optional[str]]:
    """Branch of each rate formula: "d/p*" or "1" for μ, "d/q" or "1" for ν, None when ν is undefined."""
    nu = None
    if q is not None and q != d:
        nu = "d/q" if q > d else "1"
    return {"mu": "d/p*" if p > d / 2 else "1", "nu": nu}


def _fit_slope(quantity: str, eps: np.ndarray, values: np.ndarray) -> SlopeFit:
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        message = f"{quantity} has vanishing or non-finite entries; no rate is fitted"
        log.warning(message)
        warnings.warn(message, DegenerateFitWarning, stacklevel=3)
        return SlopeFit(quantity, math.nan, math.nan, math.nan, int(values.size))
    x = np.log(eps)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    spread = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(residual**2)) / (x.size - 2) / spread)
    return SlopeFit(quantity, float(slope), float(intercept), stderr, int(x.size))


@track(module="homogenize_harness")
def remainder_rates(
    eps_list: Sequence[float],
    l2_error: Sequence[float],
    grad_remainder_l2: Sequence[float],
    p: float,
    d: int,
    alpha: float = 0.5,
    r: Optional[float] = None,
    grad_remainder_lr: Optional[Sequence[float]] = None,
) -> SweepReport:
    """Log-log slopes of the sweep errors against ε and the reference rates they are compared with."""
    eps = np.asarray(eps_list, dtype=float)
    if eps.size < MIN_SWEEP_POINTS:
        raise InsufficientPoints(f"rate fits need at least {MIN_SWEEP_POINTS} ε values, got {eps.size}")
    order = np.argsort(-eps, kind="stable")
    eps = eps[order]
    if np.any(np.diff(eps) >= 0):
        raise ConfigInvalid("ε values must be distinct", key="eps")
    series = {"l2_error": l2_error, "grad_remainder_l2": grad_remainder_l2}
    if grad_remainder_lr is not None:
        series["grad_remainder_lr"] = grad_remainder_lr
    ordered = {name: np.asarray(values, dtype=float)[order] for name, values in series.items()}
    slopes = [_fit_slope(name, eps, values) for name, values in ordered.items()]
    mu, nu, q = reference_rates(p, d, alpha)
    rates = {"mu": mu, "nu": nu}
    for fit in slopes:
        fit.reference = FIT_REFERENCES[fit.quantity]
        fit.reference_rate = rates[fit.reference]
    report = SweepReport(
        eps_list=eps.tolist(),
        l2_error=ordered["l2_error"].tolist(),
        grad_remainder_l2=ordered["grad_remainder_l2"].tolist(),
        slopes=slopes,
        p=float(p),
        mu=mu,
        nu=nu,
        q=q,
        reference="nu" if grad_remainder_lr is not None else "mu",
        branches=rate_branches(p, d, q),
    )
    if grad_remainder_lr is not None:
        report.grad_remainder_lr = ordered["grad_remainder_lr"].tolist()
        report.r = float(r) if r is not None else 2.0
    return report


def periodic_background(spec: Coefficient) -> Coefficient:
    if isinstance(spec, PerturbedPeriodic):
        return spec.periodic
    if spec.has_unit_period:
        return spec
    raise ConfigInvalid(f"'{spec.type}' has no periodic background to homogenize", key="coefficient.type")


@track(module="homogenize_harness")
def eps_sweep(
    spec: Coefficient,
    eps_list: Sequence[float],
    p: float,
    domain: Optional[Domain] = None,
    source: Optional[Source] = None,
    alpha: float = 0.5,
    r: Optional[float] = None,
    cell_resolution: int = 1024,
) -> SweepReport:
    """Solve the ε-problems, their homogenized limit and two-scale remainders, and fit the convergence rates.

    ‖u^ε - u*‖ is measured on Ω and ‖∇R^ε‖ on the interior window Ω₁.
    """
    domain = domain or Interval()
    source = source or ConstantSource(1.0)
    cell = Grid.unit_cell(domain.dim, cell_resolution)
    correctors, a_star = solve_cell_problem(sample_field(periodic_background(spec), cell))

    def _measure(eps_value: float):
        eps = EpsDescriptor.literal(eps_value)
        u_eps = solve_eps_problem(spec, eps, domain, source)
        n = u_eps.grid.cells_per_unit
        u_star = homogenized_problem(a_star, domain, source, n, method=u_eps.method)
        approximation = first_order_approx(u_star, correctors, eps, u_eps=u_eps)
        interior = domain.interior_mask(u_eps.grid)
        grad_r = approximation.grad_remainder.values
        errors = [u_eps.l2_distance(u_star), l2_on(grad_r, u_eps.grid, interior)]
        if r is not None:
            magnitude = np.sqrt(np.sum(grad_r**2, axis=-1))
            errors.append(lp_norm(magnitude[interior], u_eps.grid.cell_volume, r))
        log.debug("sweep eps=%g errors %s", eps_value, errors)
        return errors

    eps_sorted = sorted((float(e) for e in eps_list), reverse=True)
    measured = map_jobs(_measure, eps_sorted)
    columns = list(zip(*measured))
    report = remainder_rates(
        eps_sorted,
        columns[0],
        columns[1],
        p,
        domain.dim,
        alpha=alpha,
        r=r,
        grad_remainder_lr=columns[2] if r is not None else None,
    )
    report.additional_properties["a_star"] = a_star.to_dict()
    return report


def _log_phase_limit(spec: RadialLogOsc, phase: float):
    def inverse(t):
        return 1.0 / (spec.base + spec.amplitude * np.sin(phase + np.log(t)))

    return inverse


def _check_indices(n_list: Sequence[int], low: int, high: int) -> List[int]:
    indices = [int(n) for n in n_list]
    if not indices or any(not low <= n <= high for n in indices):
        raise ConfigInvalid(f"subsequence indices must lie in {low}..{high}, got {list(n_list)}", key="eps.n")
    return indices


def _limit_solution(spec: RadialLogOsc, phase: float, domain: Interval, source: Source, grid: Grid) -> np.ndarray:
    u, _, _ = quadrature_solve(_log_phase_limit(spec, phase), source, domain.lower, domain.upper, grid.axis(0))
    return u


@track(module="homogenize_harness")
def counterexample_1d(
    n_list: Sequence[int],
    source: Optional[Source] = None,
    y: float = 0.0,
    domain: Optional[Interval] = None,
    cells_per_unit: int = 2048,
    coefficient: Optional[RadialLogOsc] = None,
) -> SubsequenceReport:
    """Along ε_n = exp(-2πn - y), u^{ε_n} approaches the solution for a*(x) = base + amplitude·sin(y + ln x).

    The cross-branch distance compares that limit with the one for the phase y + π.
    """
    source = source or ConstantSource(1.0)
    domain = domain or Interval(1.0, 2.0)
    coefficient = coefficient or RadialLogOsc()
    if domain.lower <= 0:
        raise DomainTooSmall(f"the limit coefficient needs x > 0, got the interval ({domain.lower}, {domain.upper})")
    indices = _check_indices(n_list, 0, 8)
    grid = domain.grid(cells_per_unit)
    x = grid.axis(0)
    limit = _limit_solution(coefficient, y, domain, source, grid)
    other = _limit_solution(coefficient, y + math.pi, domain, source, grid)
    limit_a = 1.0 / _log_phase_limit(coefficient, y)(x)

    def _member(n: int):
        eps = EpsDescriptor.exp_sequence(n, y)
        solution = solve_eps_problem(coefficient, eps, domain, source, cells_per_unit)
        a_n = coefficient.evaluate_rescaled(x[:, None], eps)[:, 0, 0]
        return l2_on(solution.u.values - limit, grid), float(np.max(np.abs(a_n - limit_a)))

    members = map_jobs(_member, indices)
    return SubsequenceReport(
        branch=f"y={y:g}",
        n_list=indices,
        distances=[m[0] for m in members],
        limit_norm=l2_on(limit, grid),
        cross_branch_distance=l2_on(limit - other, grid),
        phase=float(y),
        deviations=[m[1] for m in members],
    )


@attrs.define
class PhaseFamily:
    """Limits of the one-dimensional counter-example for several phases y and their pairwise L² distances."""

    phases: List[float]
    limit_norms: List[float]
    distances: List[List[float]]

    def to_dict(self):
        return {"phases": self.phases, "limit_norms": self.limit_norms, "distances": self.distances}


@track(module="homogenize_harness")
def phase_family(
    source: Optional[Source] = None,
    phases: Sequence[float] = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi),
    domain: Optional[Interval] = None,
    cells_per_unit: int = 2048,
    coefficient: Optional[RadialLogOsc] = None,
) -> PhaseFamily:
    source = source or ConstantSource(1.0)
    domain = domain or Interval(1.0, 2.0)
    coefficient = coefficient or RadialLogOsc()
    grid = domain.grid(cells_per_unit)
    limits = [_limit_solution(coefficient, y, domain, source, grid) for y in phases]
    distances = [[l2_on(a - b, grid) for b in limits] for a in limits]
    return PhaseFamily([float(y) for y in phases], [l2_on(u, grid) for u in limits], distances)


@track(module="homogenize_harness")
def counterexample_2d(
    n_list: Sequence[int],
    source: Optional[Source] = None,
    cells_per_unit: int = ANNULUS_MIN_RESOLUTION,
    domain: Optional[Annulus] = None,
    coefficient: Optional[RadialIterLogOsc] = None,
    offsets: Sequence[float] = (0.0, 0.5 * math.pi),
) -> List[SubsequenceReport]:
    """Both branches ε_n = exp(-exp(2πn + offset)) of the iterated-logarithm coefficient on the annulus.

    Branch k converges to the constant base + amplitude·sin(offset_k); each report carries the distances of u^{ε_n}
    to its limit, the sup deviation δ_n of the coefficient and the bound (δ_n/λ_n)·‖∇u*‖·C_P on the distance.
    """
    if cells_per_unit < ANNULUS_MIN_RESOLUTION:
        raise ResolutionInsufficient(
            f"the staircase annulus needs at least {ANNULUS_MIN_RESOLUTION} cells per unit, got {cells_per_unit}"
        )
    source = source or ConstantSource(1.0)
    domain = domain or Annulus()
    coefficient = coefficient or RadialIterLogOsc()
    indices = _check_indices(n_list, 1, 4)

    limits = [coefficient.base + coefficient.amplitude * math.sin(offset) for offset in offsets]
    limit_solutions = map_jobs(
        lambda value: solve_eps_problem(Constant(value), EPS_ONE, domain, source, cells_per_unit), limits
    )
    grid = limit_solutions[0].grid
    mask = limit_solutions[0].mask
    poincare = domain.poincare_constant(grid.h)
    first, second = limit_solutions[0], limit_solutions[1]
    ratio = limits[0] / limits[1]
    second_norm = second.l2_norm()
    ratio_error = l2_on(second.u.values - ratio * first.u.values, grid, mask)
    ratio_error = ratio_error / second_norm if second_norm > 0 else ratio_error

    def _member(job):
        branch, n = job
        eps = EpsDescriptor.double_exp_sequence(n, offset=offsets[branch])
        solution = solve_eps_problem(coefficient, eps, domain, source, cells_per_unit)
        a_n = coefficient.evaluate_rescaled(grid.centers(), eps)[..., 0, 0][mask]
        deviation = float(np.max(np.abs(a_n - limits[branch])))
        floor = float(np.min(a_n))
        limit = limit_solutions[branch]
        bound = deviation / floor * limit.grad_l2 * poincare
        return solution.l2_distance(limit), deviation, bound

    jobs = [(branch, n) for branch in range(len(offsets)) for n in indices]
    results = dict(zip(jobs, map_jobs(_member, jobs)))

    reports = []
    for branch, limit in enumerate(limit_solutions):
        other = limit_solutions[1 - branch] if len(limit_solutions) == 2 else limit_solutions[0]
        report = SubsequenceReport(
            branch=str(branch + 1),
            n_list=indices,
            distances=[results[(branch, n)][0] for n in indices],
            limit_norm=limit.l2_norm(),
            cross_branch_distance=limit.l2_distance(other),
            deviations=[results[(branch, n)][1] for n in indices],
            bounds=[results[(branch, n)][2] for n in indices],
            limit_ratio_error=ratio_error,
        )
        report.additional_properties["limit_coefficient"] = limits[branch]
        reports.append(report)
    return reports
