"""Named, reproducible experiments.

Each scenario declares its default configuration tables; a run overlays the user's configuration on them, binds the
solver settings and writes the JSON summary, CSV tables, plot data and the resolved ``config.toml`` to the output
directory.
"""
import contextlib
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List

import attrs
import numpy as np

from homoglab.coefficients import Laminate, RadialIterLogOsc, RadialLogOsc
from homoglab.coefficients import from_config as coefficient_from_config
from homoglab.config import ScenarioConfig, write_config
from homoglab.corrector import defect_corrector_direct, defect_corrector_fixed_point, periodic_corrector
from homoglab.corrector import solve_cell_problem
from homoglab.discrete_calculus import ball_average_decay, sobolev_exponent, weak_star_vanishing
from homoglab.domains import domain_from_config, source_from_config
from homoglab.exceptions import ConfigInvalid, ScenarioUnknown
from homoglab.grid_fields import Grid, MatrixField, ScalarField, VectorField, sample_field
from homoglab.homogenize_harness import (
    counterexample_1d,
    counterexample_2d,
    eps_sweep,
    harmonic_mean,
    periodic_background,
    phase_family,
)
from homoglab.lab import Lab
from homoglab.periodic_extraction import cesaro_periodic_part, gns_verify
from homoglab.reports import PlotSeries, ReportWriter, ScenarioResult

log = logging.getLogger("homoglab")


@attrs.frozen
class Scenario:
    name: str
    description: str
    runner: Callable[[ScenarioConfig], ScenarioResult]
    defaults: Dict[str, Dict[str, Any]] = attrs.field(factory=dict)

    def default_config(self) -> ScenarioConfig:
        return ScenarioConfig(scenario=self.name).resolve(self.defaults)


@attrs.define
class RunOutcome:
    directory: Path
    files: List[Path]
    summary: Dict[str, Any]


REGISTRY: Dict[str, Scenario] = {}


def scenario(name: str, description: str, **defaults):
    def _decorator(func):
        REGISTRY[name] = Scenario(name, description, func, defaults)
        return func

    return _decorator


def get_scenario(name: str) -> Scenario:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ScenarioUnknown(name, sorted(REGISTRY))


def list_scenarios(filter_: str = "") -> List[Scenario]:
    """Scenarios whose name contains ``filter_`` (case-insensitive), sorted by name."""
    needle = (filter_ or "").lower()
    return [REGISTRY[name] for name in sorted(REGISTRY) if needle in name.lower()]


def run_scenario(config: ScenarioConfig) -> RunOutcome:
    """Run one scenario and persist its reports. The solver settings in effect before the run are restored."""
    from homoglab import __version__

    scenario_ = get_scenario(config.scenario)
    resolved = config.resolve(scenario_.defaults)
    directory = Path(resolved.output_dir)
    with _output_errors(directory):
        writer = ReportWriter(directory)
    previous = Lab.current.settings
    try:
        settings = resolved.init_settings()
        with Lab.current.scope() as scope:
            scope["scenario"] = scenario_.name
            log.info("running %s", scenario_.name)
            result = scenario_.runner(resolved)
            provenance = dict(scope.context)
    finally:
        Lab.current.bind(previous)

    summary = {
        "scenario": scenario_.name,
        "version": __version__,
        "config": resolved.to_dict(),
        "settings": settings.as_dict(),
        "scope": provenance,
        "results": result.summary,
    }
    with _output_errors(directory):
        files = writer.write_result(result, summary)
        files.append(write_config(resolved, directory))
    return RunOutcome(directory, files, summary)


@contextlib.contextmanager
def _output_errors(directory: Path):
    try:
        yield
    except OSError as e:
        raise ConfigInvalid(f"cannot write to {directory}: {e.strerror or e}", key="output_dir") from e


def _trig(frequency: List[int], amplitude: float = 1.0) -> Dict[str, Any]:
    return {
        "type": "periodic_trig",
        "base": 2.0,
        "terms": [{"amplitude": amplitude, "frequency": frequency, "phase": 0.0}],
    }


def _param(config: ScenarioConfig, table: str, key: str):
    values = getattr(config, table)
    if key not in values:
        raise ConfigInvalid("missing value", key=f"{table}.{key}")
    return values[key]


def _tensor_error(matrix, oracle) -> float:
    return float(np.max(np.abs(np.asarray(matrix) - np.asarray(oracle))))


@scenario(
    "harmonic-1d",
    "1D cell problem; a* against the harmonic mean of a_per",
    coefficient=_trig([1]),
    grid={"cells_per_unit": 512},
)
def harmonic_1d(config: ScenarioConfig) -> ScenarioResult:
    spec = coefficient_from_config(config.coefficient)
    if not spec.has_unit_period:
        raise ConfigInvalid(f"'{spec.type}' is not periodic", key="coefficient.type")
    cell = Grid.unit_cell(1, _param(config, "grid", "cells_per_unit"))
    correctors, a_star = solve_cell_problem(sample_field(spec, cell))
    if isinstance(spec, Laminate):
        f = spec.fraction
        oracle = 1.0 / (f / spec.values[0] + (1 - f) / spec.values[1])
    else:
        oracle = harmonic_mean(spec)
    value = a_star.matrix[0][0]
    w = correctors[0].w_per.values
    return ScenarioResult(
        summary={"a_star": a_star, "harmonic_mean": oracle, "error": abs(value - oracle)},
        tables={"corrector": [{"y": y, "w": v} for y, v in zip(cell.axis(0), w)]},
    )


@scenario(
    "laminate-2d",
    "2D laminate cell problem; a* against the harmonic/arithmetic formulas",
    coefficient={"type": "laminate", "values": [1.0, 3.0], "axis": 0, "fraction": 0.5},
    grid={"cells_per_unit": 128},
)
def laminate_2d(config: ScenarioConfig) -> ScenarioResult:
    spec = coefficient_from_config(config.coefficient)
    if not isinstance(spec, Laminate):
        raise ConfigInvalid("the laminate scenario needs a laminate coefficient", key="coefficient.type")
    cell = Grid.unit_cell(2, _param(config, "grid", "cells_per_unit"))
    _, a_star = solve_cell_problem(sample_field(spec, cell))
    f = spec.fraction
    harmonic = 1.0 / (f / spec.values[0] + (1 - f) / spec.values[1])
    arithmetic = f * spec.values[0] + (1 - f) * spec.values[1]
    oracle = [[arithmetic, 0.0], [0.0, arithmetic]]
    oracle[spec.axis][spec.axis] = harmonic
    return ScenarioResult(
        summary={
            "a_star": a_star,
            "oracle": oracle,
            "harmonic": harmonic,
            "arithmetic": arithmetic,
            "error": _tensor_error(a_star.matrix, oracle),
        }
    )


def _profile(kind: str, rho: np.ndarray) -> np.ndarray:
    if kind == "tent":
        return np.maximum(0.0, 1.0 - rho)
    inside = rho < 1
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - np.where(inside, rho, 0.0) ** 2)), 0.0)


GNS_SHAPES = (("tent", 1.0), ("tent", 2.0), ("bump", 1.5), ("bump", 3.0))
GNS_VARIANTS = (("base", (0.0, 0.0), 1.0), ("translate", (2.0, 1.0), 1.0), ("dilate", (0.0, 0.0), 2.0))


@scenario(
    "gns-suite",
    "discrete Gagliardo-Nirenberg-Sobolev ratios over tents and bumps",
    grid={"cells_per_unit": 8, "half_width": 12},
    exponents={"p": 1.5},
)
def gns_suite(config: ScenarioConfig) -> ScenarioResult:
    p = _param(config, "exponents", "p")
    grid = Grid.centered(_param(config, "grid", "half_width"), 2, _param(config, "grid", "cells_per_unit"))
    centers = grid.centers()
    rows = []
    ratios = {}
    for kind, width in GNS_SHAPES:
        for variant, shift, scale in GNS_VARIANTS:
            rho = np.sqrt(np.sum((centers - np.array(shift)) ** 2, axis=-1)) / (width * scale)
            report = gns_verify(ScalarField(grid, _profile(kind, rho)), p, compact_support=True)
            ratios[(kind, width, variant)] = report.ratio
            rows.append({"shape": kind, "width": width, "variant": variant, **report.to_dict()})

    def _family_max(variant):
        return max(ratios[(kind, width, variant)] for kind, width in GNS_SHAPES)

    translation_error = max(
        abs(ratios[(kind, width, "translate")] - ratios[(kind, width, "base")]) / ratios[(kind, width, "base")]
        for kind, width in GNS_SHAPES
    )
    base_max = _family_max("base")
    return ScenarioResult(
        summary={
            "members": len(rows),
            "max_ratio": max(r["ratio"] for r in rows),
            "translation_error": translation_error,
            "dilation_variation": abs(_family_max("dilate") - base_max) / base_max,
            "all_finite": all(r["ratio"] is not None and math.isfinite(r["ratio"]) for r in rows),
        },
        tables={"gns": rows},
    )


@scenario(
    "cesaro-extract",
    "Cesàro periodic part of a perturbed periodic coefficient and of the two log-oscillating media",
    coefficient={
        "type": "perturbed_periodic",
        "periodic": _trig([1, 1], amplitude=0.5),
        "amplitude": 1.0,
        "width": 1.0,
        "decay": 2.0,
        "center": [0.0, 0.0],
        "profile": "algebraic",
    },
    grid={"cells_per_unit": 4, "half_width": 33},
    exponents={"p": 1.5},
    params={"n_max": 32, "check_log_oscillating": True},
)
def cesaro_extract(config: ScenarioConfig) -> ScenarioResult:
    spec = coefficient_from_config(config.coefficient)
    n = _param(config, "grid", "cells_per_unit")
    grid = Grid.centered(_param(config, "grid", "half_width"), 2, n)
    n_max = _param(config, "params", "n_max")
    p = _param(config, "exponents", "p")
    centers = grid.centers()
    f = ScalarField(grid, spec.evaluate(centers)[..., 0, 0])
    extra = {}
    if hasattr(spec, "perturbation"):
        cell = Grid.unit_cell(2, n)
        extra["known_periodic"] = ScalarField(cell, spec.periodic.evaluate(cell.centers())[..., 0, 0])
        extra["known_perturbation"] = ScalarField(grid, spec.perturbation(centers))
    decomposition = cesaro_periodic_part(f, n_max, p=p, **extra)
    summary = {"decomposition": decomposition.summary}
    tables = {"cesaro_trace": [{"n": N, "distance": d} for N, d in decomposition.convergence_trace]}
    if _param(config, "params", "check_log_oscillating"):
        flags = {}
        for other in (RadialLogOsc(), RadialIterLogOsc()):
            values = ScalarField(grid, other.evaluate(centers)[..., 0, 0])
            other_decomposition = cesaro_periodic_part(values, n_max)
            flags[other.type] = {"converged": other_decomposition.converged, "n_used": other_decomposition.n_used}
        summary["log_oscillating"] = flags
    return ScenarioResult(summary=summary, tables=tables)


@scenario(
    "defect-corrector",
    "defect corrector of a perturbed periodic medium on a truncated cube, with sublinearity diagnostics",
    coefficient={
        "type": "perturbed_periodic",
        "periodic": _trig([1, 0]),
        "amplitude": 0.5,
        "width": 1.0,
        "decay": 2.0,
        "center": [0.0, 0.0],
        "profile": "algebraic",
    },
    grid={"cells_per_unit": 8, "half_width": 16},
    exponents={"p": 1.5},
    params={"r_inner": 4.0, "direction": 0},
)
def defect_corrector(config: ScenarioConfig) -> ScenarioResult:
    spec = coefficient_from_config(config.coefficient)
    n = _param(config, "grid", "cells_per_unit")
    direction = _param(config, "params", "direction")
    if direction not in (0, 1):
        raise ConfigInvalid(f"must be 0 or 1, got {direction!r}", key="params.direction")
    a_per = sample_field(periodic_background(spec), Grid.unit_cell(2, n))
    periodic = periodic_corrector(a_per, direction)
    a = sample_field(spec, Grid.centered(_param(config, "grid", "half_width"), 2, n))
    solution = defect_corrector_direct(
        a,
        a_per,
        periodic,
        direction,
        R_inner=_param(config, "params", "r_inner"),
        p=_param(config, "exponents", "p"),
    )
    plots = {}
    if solution.sublinearity is not None and not solution.sublinearity.degenerate:
        plots["sublinearity"] = PlotSeries(solution.sublinearity.radii, solution.sublinearity.averaged_values)
    return ScenarioResult(summary={"corrector": solution}, plots=plots)


@scenario(
    "rate-sweep-1d",
    "1D ε-sweep with exact quadrature; fitted rates of u^ε - u* and ∇R^ε",
    coefficient=_trig([1]),
    domain={"type": "interval", "lower": 0.0, "upper": 1.0},
    source={"type": "constant", "value": 1.0},
    eps={"values": [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256]},
    exponents={"p": 0.4, "alpha": 0.5, "r": 2.0},
    grid={"cell_resolution": 1024},
)
def rate_sweep_1d(config: ScenarioConfig) -> ScenarioResult:
    report = eps_sweep(
        coefficient_from_config(config.coefficient),
        _param(config, "eps", "values"),
        _param(config, "exponents", "p"),
        domain=domain_from_config(config.domain),
        source=source_from_config(config.source),
        alpha=_param(config, "exponents", "alpha"),
        r=config.exponents.get("r"),
        cell_resolution=_param(config, "grid", "cell_resolution"),
    )
    return ScenarioResult(
        summary={"sweep": report},
        tables={"sweep": report.rows()},
        plots={
            "l2_error": PlotSeries(report.eps_list, report.l2_error),
            "grad_remainder_l2": PlotSeries(report.eps_list, report.grad_remainder_l2),
        },
    )


@scenario(
    "counterexample-1d",
    "1D log-oscillating medium: distinct limits along ε_n = exp(-2πn - y)",
    coefficient={"type": "radial_log_osc", "base": 2.0, "amplitude": 1.0},
    domain={"type": "interval", "lower": 1.0, "upper": 2.0},
    source={"type": "constant", "value": 1.0},
    eps={"n": [1, 2, 3], "y": 0.0},
    grid={"cells_per_unit": 2048},
    params={"phase_family": True},
)
def counterexample_1d_scenario(config: ScenarioConfig) -> ScenarioResult:
    coefficient = coefficient_from_config(config.coefficient)
    if not isinstance(coefficient, RadialLogOsc):
        raise ConfigInvalid("the 1D counter-example needs a radial_log_osc coefficient", key="coefficient.type")
    domain = domain_from_config(config.domain)
    source = source_from_config(config.source)
    n = _param(config, "grid", "cells_per_unit")
    report = counterexample_1d(
        _param(config, "eps", "n"),
        source,
        y=_param(config, "eps", "y"),
        domain=domain,
        cells_per_unit=n,
        coefficient=coefficient,
    )
    summary = {"branch": report, "cross_branch_distance": report.cross_branch_distance}
    if _param(config, "params", "phase_family"):
        summary["phase_family"] = phase_family(source, domain=domain, cells_per_unit=n, coefficient=coefficient)
    return ScenarioResult(
        summary=summary,
        tables={"subsequence": report.rows()},
        plots={"distances": PlotSeries(report.n_list, report.distances, log_scale=False)},
    )


@scenario(
    "counterexample-2d",
    "2D iterated-log medium on the annulus: limits 2 and 3 along two double-exponential ε_n",
    coefficient={"type": "radial_iter_log_osc", "base": 2.0, "amplitude": 1.0},
    domain={"type": "annulus", "inner": 1.0, "outer": 2.0},
    source={"type": "constant", "value": 1.0},
    eps={"n": [1, 2], "offsets": [0.0, math.pi / 2]},
    grid={"cells_per_unit": 64},
)
def counterexample_2d_scenario(config: ScenarioConfig) -> ScenarioResult:
    coefficient = coefficient_from_config(config.coefficient)
    if not isinstance(coefficient, RadialIterLogOsc):
        raise ConfigInvalid("the 2D counter-example needs a radial_iter_log_osc coefficient", key="coefficient.type")
    offsets = _param(config, "eps", "offsets")
    if len(offsets) != 2:
        raise ConfigInvalid("exactly two branch offsets are needed", key="eps.offsets")
    reports = counterexample_2d(
        _param(config, "eps", "n"),
        source_from_config(config.source),
        cells_per_unit=_param(config, "grid", "cells_per_unit"),
        domain=domain_from_config(config.domain),
        coefficient=coefficient,
        offsets=offsets,
    )
    rows = []
    for report in reports:
        rows.extend({"branch": report.branch, **row} for row in report.rows())
    return ScenarioResult(
        summary={
            "branches": reports,
            "cross_branch_distance": reports[0].cross_branch_distance,
            "limit_ratio_error": reports[0].limit_ratio_error,
        },
        tables={"subsequence": rows},
    )


@scenario(
    "decay-suite",
    "ball-average decay and weak-* vanishing of an algebraically decaying perturbation",
    grid={"cells_per_unit": 4, "half_width": 32},
    exponents={"p": 1.5},
    params={"radii": [4.0, 8.0, 16.0, 32.0], "weak_star_eps": [0.5, 0.25, 0.125]},
)
def decay_suite(config: ScenarioConfig) -> ScenarioResult:
    p = _param(config, "exponents", "p")
    grid = Grid.centered(_param(config, "grid", "half_width"), 2, _param(config, "grid", "cells_per_unit"))
    reference = -grid.dim / sobolev_exponent(p, grid.dim)
    # |ã| ~ |x|^reference, the slowest decay an E^p perturbation can have on average
    perturbation = ScalarField(grid, (1.0 + grid.radii()) ** reference)
    fit = ball_average_decay(perturbation, _param(config, "params", "radii"), reference_exponent=reference)
    eps_list = _param(config, "params", "weak_star_eps")
    integrals = weak_star_vanishing(perturbation, eps_list)
    return ScenarioResult(
        summary={
            "decay": fit,
            "exponent_error": abs(fit.fitted_exponent - reference) if fit.fitted_exponent is not None else None,
            "weak_star": integrals,
            "weak_star_decreasing": all(b < a for a, b in zip(integrals, integrals[1:])),
        },
        tables={"weak_star": [{"eps": e, "integral": v} for e, v in zip(eps_list, integrals)]},
        plots={"ball_averages": PlotSeries(fit.radii, fit.averaged_values)},
    )


@scenario(
    "fixed-point",
    "fixed-point defect solver: contraction ratio against the perturbation amplitude",
    coefficient=_trig([1, 0]),
    grid={"cells_per_unit": 8, "half_width": 4},
    params={"amplitudes": [0.1, 0.2, 0.4], "decay": 2.0, "tolerance": 1e-6},
)
def fixed_point(config: ScenarioConfig) -> ScenarioResult:
    spec = coefficient_from_config(config.coefficient)
    if not spec.has_unit_period:
        raise ConfigInvalid(f"'{spec.type}' is not periodic", key="coefficient.type")
    n = _param(config, "grid", "cells_per_unit")
    grid = Grid.centered(_param(config, "grid", "half_width"), 2, n)
    a_per = sample_field(spec, Grid.unit_cell(2, n))
    r = grid.radii()
    profile = (1.0 + r) ** -_param(config, "params", "decay")
    rhs = VectorField(grid, np.stack([np.exp(-(r**2)), np.zeros(grid.cells)], axis=-1))
    traces = []
    for amplitude in _param(config, "params", "amplitudes"):
        a_tilde = MatrixField.isotropic(ScalarField(grid, amplitude * profile))
        _, trace = defect_corrector_fixed_point(a_per, a_tilde, rhs, tol=_param(config, "params", "tolerance"))
        traces.append(trace)
    means = [trace.mean_ratio for trace in traces]
    return ScenarioResult(
        summary={
            "traces": traces,
            "mean_ratios": means,
            "ratio_increases": all(b > a for a, b in zip(means, means[1:])),
        },
        tables={
            "contraction": [
                {"amplitude": t.amplitude, "iterations": t.iterations, "mean_ratio": t.mean_ratio} for t in traces
            ]
        },
    )
