"""Periodic part of an almost translation-invariant sample and the discrete GNS check.

The periodic part is the Cesàro limit f_per = lim (1/#I_N) Σ_{k ∈ I_N} f(· + k) with I_N = {k ∈ ℤ^d : |k| <= N}
(Euclidean norm). The means are built shell by shell in sorted order of k so the result does not depend on
scheduling.
"""
import logging
import math
import warnings
from typing import List, Optional, Tuple

import attrs
import numpy as np

from homoglab.decorators import track
from homoglab.discrete_calculus import (
    discrete_gradient,
    holder_modulus,
    local_average,
    lp_norm,
    sobolev_exponent,
)
from homoglab.exceptions import ExponentOutOfRange, GridTooSmall, NonConvergentWarning
from homoglab.grid_fields import Grid, ScalarField, periodic_extension, unit_cell_block
from homoglab.internal.models import DecompositionSummary, GnsReport

log = logging.getLogger("homoglab")

CESARO_TOL = 1e-4


@attrs.define
class Decomposition:
    """f = f_per + f̃ on the sample domain of f."""

    periodic_part: ScalarField
    perturbation: ScalarField
    summary: DecompositionSummary

    @property
    def n_used(self) -> int:
        return self.summary.n_used

    @property
    def convergence_trace(self) -> List[List[float]]:
        return self.summary.convergence_trace

    @property
    def gns_ratio(self) -> Optional[float]:
        return self.summary.gns_ratio

    @property
    def converged(self) -> bool:
        return self.summary.converged

    def reconstruct(self) -> ScalarField:
        return periodic_extension(self.periodic_part, self.perturbation.grid) + self.perturbation


def cesaro_shells(radius: int, dim: int) -> List[List[Tuple[int, ...]]]:
    """Lattice points grouped by shell: entry N holds the k with N - 1 < |k| <= N (entry 0 holds k = 0)."""
    points = (tuple(i - radius for i in k) for k in np.ndindex(*(2 * radius + 1,) * dim))
    shells = [[] for _ in range(radius + 1)]
    for k in sorted(points, key=lambda k: (sum(c * c for c in k), k)):
        norm2 = sum(c * c for c in k)
        shell = math.isqrt(norm2 - 1) + 1 if norm2 else 0
        if shell <= radius:
            shells[shell].append(k)
    return shells


def _tail(trace: List[List[float]], n_max: int) -> List[List[float]]:
    return [[n, d] for n, d in trace if n >= n_max / 2]


def _tail_exponent(trace: List[List[float]], n_max: int) -> Optional[float]:
    tail = [(n, d) for n, d in _tail(trace, n_max) if d > 0]
    if len(tail) < 3:
        return None
    n, d = np.array(tail, dtype=float).T
    slope, _ = np.polyfit(np.log(n), np.log(d), 1)
    return float(-slope)


def _tail_rises(trace: List[List[float]], n_max: int, tol: float) -> bool:
    # a rise that stays below tol does not count
    distances = [d for _, d in _tail(trace, n_max)]
    return any(later > earlier and later >= tol for earlier, later in zip(distances, distances[1:]))


def _l1(values: np.ndarray, grid: Grid) -> float:
    return float(np.sum(np.abs(values)) * grid.cell_volume)


@track(module="periodic_extraction")
def cesaro_periodic_part(
    f: ScalarField,
    N_max: int,
    tol: float = CESARO_TOL,
    p: Optional[float] = None,
    alpha: float = 0.5,
    known_periodic: Optional[ScalarField] = None,
    known_perturbation: Optional[ScalarField] = None,
) -> Decomposition:
    """Cesàro means of f over I_N for N = 1..N_max.

    The last mean is returned. The trace over N >= N_max/2 must not rise to ``tol`` or above; given that, it is
    accepted when its last distance is below ``tol`` or when it decays summably. Otherwise the decomposition is
    flagged as not converged.
    ``known_periodic`` and ``known_perturbation`` add the recovery error and the Cesàro mean of the exact
    perturbation to the summary.
    """
    grid = f.grid
    d = grid.dim
    if N_max < 1:
        raise GridTooSmall(f"N_max must be >= 1, got {N_max}")
    if not grid.covers([-N_max - 1] * d, [N_max + 1] * d):
        raise GridTooSmall(f"Cesàro means up to N={N_max} need a grid covering [-{N_max + 1}, {N_max + 1}]^{d}")
    cell = Grid.unit_cell(d, grid.cells_per_unit)

    shells = cesaro_shells(N_max, d)
    total = np.zeros((grid.cells_per_unit,) * d)
    oracle_total = np.zeros_like(total)
    count = 0

    def _add_shell(shell):
        nonlocal total, oracle_total, count
        for k in shell:
            total = total + unit_cell_block(f, k).values
            if known_perturbation is not None:
                oracle_total = oracle_total + unit_cell_block(known_perturbation, k).values
            count += 1

    _add_shell(shells[0])
    previous = total / count
    trace = []
    for N in range(1, N_max + 1):
        _add_shell(shells[N])
        mean = total / count
        distance = _l1(mean - previous, cell)
        trace.append([N, distance])
        log.debug("cesaro N=%d distance=%.3e", N, distance)
        previous = mean

    last = trace[-1][1]
    tail_exponent = _tail_exponent(trace, N_max)
    rises = _tail_rises(trace, N_max, tol)
    converged = not rises and last < tol
    if not converged and not rises and tail_exponent is not None and tail_exponent >= 1.5:
        converged = last * N_max / (tail_exponent - 1) < 10 * tol * N_max
    if not converged:
        reason = "rise in the tail" if rises else f"last distance {last:.3e}"
        message = f"Cesàro means did not settle up to N={N_max} ({reason})"
        log.warning(message)
        warnings.warn(message, NonConvergentWarning, stacklevel=3)

    periodic_part = ScalarField(cell, previous)
    perturbation = f - periodic_extension(periodic_part, grid)
    summary = DecompositionSummary(
        n_used=N_max, convergence_trace=trace, converged=converged, tail_exponent=tail_exponent
    )
    summary.holder_f = holder_modulus(f, alpha)
    summary.holder_periodic = holder_modulus(periodic_part, alpha, periodic=True)
    if known_periodic is not None:
        summary.recovered_error = _l1(previous - known_periodic.values, cell)
    if known_perturbation is not None:
        summary.tail_oracle = _l1(oracle_total / count, cell)
    if p is not None and 1 <= p < d:
        report = _gns_sides(f, perturbation, p)
        summary.gns_ratio = report.ratio
    return Decomposition(periodic_part, perturbation, summary)


def _gns_sides(f: ScalarField, perturbation: ScalarField, p: float, periodic_part: str = "cesaro") -> GnsReport:
    grid = f.grid
    p_star = sobolev_exponent(p, grid.dim)
    ep_norm = lp_norm(local_average(perturbation).values, grid.cell_volume, p_star)
    lp_of_delta = lp_norm(discrete_gradient(f).magnitude().values, grid.cell_volume, p)
    if lp_of_delta > 0:
        ratio, degenerate = ep_norm / lp_of_delta, False
    elif ep_norm == 0:
        ratio, degenerate = None, True
    else:
        ratio, degenerate = math.inf, False
    return GnsReport(p, p_star, ep_norm, lp_of_delta, ratio, degenerate=degenerate, periodic_part=periodic_part)


@track(module="periodic_extraction")
def gns_verify(
    f: ScalarField, p: float, compact_support: bool = False, periodic_part: Optional[ScalarField] = None
) -> GnsReport:
    """Both sides of ‖M(|f - f_per|)‖_{L^{p*}} <= C ‖δf‖_{L^p} and their ratio.

    f_per is zero for ``compact_support``, the given ``periodic_part`` if any, and the Cesàro periodic part
    otherwise. The 0/0 case is reported with ``ratio=None`` and ``degenerate=True``.
    """
    grid = f.grid
    if not 1 <= p < grid.dim:
        raise ExponentOutOfRange(f"the discrete GNS inequality needs 1 <= p < d, got p={p}, d={grid.dim}")
    if not grid.covers([-8] * grid.dim, [8] * grid.dim):
        raise GridTooSmall("gns_verify needs samples on at least [-8, 8]^d")
    if compact_support:
        return _gns_sides(f, f, p, periodic_part="zero")
    if periodic_part is not None:
        perturbation = f - periodic_extension(periodic_part, grid)
        return _gns_sides(f, perturbation, p, periodic_part="given")
    radius = int(math.floor(min(min(-o for o in grid.origin), min(grid.upper)))) - 1
    decomposition = cesaro_periodic_part(f, radius)
    return _gns_sides(f, decomposition.perturbation, p)


@track(module="periodic_extraction")
def holder_lebesgue_exponent(p: float, alpha: float, d: int) -> float:
    """q = (p(α + d) - d)/α, the Lebesgue exponent below which the Hölder-A^p inclusion fails."""
    if p < 1:
        raise ExponentOutOfRange(f"p must be >= 1, got {p}")
    if not 0 < alpha <= 1:
        raise ExponentOutOfRange(f"alpha must be in ]0, 1], got {alpha}")
    if d < 1:
        raise ExponentOutOfRange(f"d must be >= 1, got {d}")
    return (p * (alpha + d) - d) / alpha
