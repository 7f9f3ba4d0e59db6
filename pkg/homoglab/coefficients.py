"""Closed-form coefficient descriptors a(x).

Every kind evaluates to a symmetric ``(..., d, d)`` array at points of shape ``(..., d)``. ``evaluate_rescaled``
returns a(x/ε); the radial log-oscillating kinds do this in log-domain so that ε may underflow.
"""
import dataclasses
import math
from typing import Any, ClassVar, Dict, Optional, Sequence, Tuple

import numpy as np

from homoglab.exceptions import ConfigInvalid, DomainTooSmall, EllipticityViolation, GridMisaligned, NonFinite
from homoglab.grid_fields import TWO_PI, EpsDescriptor, MatrixField


def from_config(table: Dict[str, Any]) -> "Coefficient":
    """Build a coefficient from a configuration table such as ``{"type": "radial_log_osc", "base": 2}``."""
    table = dict(table)
    type_ = table.pop("type", None)
    if type_ is None:
        raise ConfigInvalid("missing coefficient type", key="coefficient.type")
    try:
        cls = BY_TYPE[type_]
    except KeyError:
        raise ConfigInvalid(f"unknown coefficient type '{type_}' (known: {', '.join(sorted(BY_TYPE))})", "type")
    return cls.from_config_table(table)


def _isotropic(values: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(values, dtype=float)[..., None, None] * np.eye(dim)


def _radii(points: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(points, dtype=float) ** 2, axis=-1))


def _scaled_points(points: np.ndarray, eps: EpsDescriptor, kind: str) -> np.ndarray:
    if eps.form == "literal":
        return np.asarray(points, dtype=float) / eps.params["eps"]
    scale = math.exp(eps.neg_log) if eps.neg_log < 709.0 else math.inf
    if not math.isfinite(scale):
        raise NonFinite(f"{kind} has no log-domain evaluation and 1/eps overflows for {eps}")
    return np.asarray(points, dtype=float) * scale


def _log1p_ratio(r: np.ndarray, eps: EpsDescriptor) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ln(1 + r/ε) without forming r/ε.

    Returns ``(value, phase, log_r)``. ``value`` is the true logarithm; ``phase`` equals it modulo 2π with whole
    turns of -ln ε removed; ``log_r`` is ln r (-inf at r = 0).
    """
    r = np.asarray(r, dtype=float)
    positive = r > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_r = np.where(positive, np.log(np.where(positive, r, 1.0)), -np.inf)
        s = log_r + eps.neg_log
        correction = np.log1p(np.exp(-np.abs(s)))
        above = s > 0
        value = np.where(above, s, 0.0) + correction
        phase = np.where(above, log_r + eps.neg_log_phase + correction, correction)
    value = np.where(positive, value, 0.0)
    phase = np.where(positive, phase, 0.0)
    return value, phase, log_r


class Coefficient:
    type: ClassVar[str]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_rescaled(self, points: np.ndarray, eps: EpsDescriptor, log_domain: Optional[bool] = None):
        return self.evaluate(_scaled_points(points, eps, self.type))

    @property
    def ellipticity(self) -> float:
        raise NotImplementedError

    @property
    def upper_bound(self) -> float:
        raise NotImplementedError

    @property
    def has_unit_period(self) -> bool:
        return False

    def to_config(self) -> Dict[str, Any]:
        table = {"type": self.type}
        for field in dataclasses.fields(self):
            table[field.name] = _plain(getattr(self, field.name))
        return table

    @classmethod
    def from_config_table(cls, table: Dict[str, Any]):
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(table) - names)
        if unknown:
            raise ConfigInvalid(f"unknown key(s) {', '.join(unknown)} for type '{cls.type}'", key="coefficient")
        try:
            return cls(**table)
        except TypeError as e:
            raise ConfigInvalid(str(e), key="coefficient")


def _plain(value):
    if isinstance(value, Coefficient):
        return value.to_config()
    if isinstance(value, MatrixField):
        return None
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


def _require_positive(floor: float):
    if not floor > 0:
        raise EllipticityViolation(floor, 0.0)


@dataclasses.dataclass(frozen=True)
class Constant(Coefficient):
    """A constant scalar (c·I) or symmetric matrix."""

    type = "constant"
    value: Any = 1.0
    holder_alpha: float = 0.5

    def __post_init__(self):
        matrix = np.asarray(self.value, dtype=float)
        if matrix.ndim not in (0, 2):
            raise ConfigInvalid("constant value must be a scalar or a square matrix", key="coefficient.value")
        if matrix.ndim == 2:
            if matrix.shape[0] != matrix.shape[1] or not np.array_equal(matrix, matrix.T):
                raise ConfigInvalid("constant matrix must be square and symmetric", key="coefficient.value")
            object.__setattr__(self, "value", tuple(tuple(float(v) for v in row) for row in matrix))
        else:
            object.__setattr__(self, "value", float(matrix))
        _require_positive(self.ellipticity)

    def _matrix(self, dim: int) -> np.ndarray:
        if isinstance(self.value, float):
            return self.value * np.eye(dim)
        matrix = np.asarray(self.value)
        if matrix.shape != (dim, dim):
            raise ConfigInvalid(f"constant matrix is {matrix.shape[0]}x{matrix.shape[0]} but d = {dim}", "value")
        return matrix

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        dim = points.shape[-1]
        return np.broadcast_to(self._matrix(dim), points.shape[:-1] + (dim, dim)).copy()

    def evaluate_rescaled(self, points, eps, log_domain=None):
        return self.evaluate(points)

    @property
    def ellipticity(self):
        if isinstance(self.value, float):
            return self.value
        return float(np.linalg.eigvalsh(np.asarray(self.value)).min())

    @property
    def upper_bound(self):
        if isinstance(self.value, float):
            return self.value
        return float(np.linalg.eigvalsh(np.asarray(self.value)).max())

    @property
    def has_unit_period(self):
        return True


@dataclasses.dataclass(frozen=True)
class PeriodicTrig(Coefficient):
    """base + Σ amplitude·sin(2π k·x + phase) with integer frequency vectors k."""

    type = "periodic_trig"
    base: float = 2.0
    terms: Sequence[Tuple[float, Sequence[int], float]] = ((1.0, (1,), 0.0),)
    holder_alpha: float = 0.5

    def __post_init__(self):
        terms = []
        for term in self.terms:
            if isinstance(term, dict):
                unknown = set(term) - {"amplitude", "frequency", "phase"}
                if unknown:
                    raise ConfigInvalid(f"unknown key(s) {', '.join(sorted(unknown))}", key="coefficient.terms")
                term = (term.get("amplitude", 1.0), term.get("frequency", (1,)), term.get("phase", 0.0))
            amplitude, frequency, phase = term
            frequency = tuple(int(k) for k in np.atleast_1d(frequency))
            terms.append((float(amplitude), frequency, float(phase)))
        object.__setattr__(self, "terms", tuple(terms))
        _require_positive(self.ellipticity)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        dim = points.shape[-1]
        values = np.full(points.shape[:-1], float(self.base))
        for amplitude, frequency, phase in self.terms:
            if len(frequency) > dim:
                raise ConfigInvalid(f"frequency {frequency} has more components than d = {dim}", "terms")
            k = np.zeros(dim)
            k[: len(frequency)] = frequency
            values = values + amplitude * np.sin(TWO_PI * (points @ k) + phase)
        return _isotropic(values, dim)

    @property
    def ellipticity(self):
        return self.base - sum(abs(a) for a, _, _ in self.terms)

    @property
    def upper_bound(self):
        return self.base + sum(abs(a) for a, _, _ in self.terms)

    @property
    def has_unit_period(self):
        return True


@dataclasses.dataclass(frozen=True)
class Laminate(Coefficient):
    """Periodic stripes: values[0] where frac(x_axis) < fraction, values[1] elsewhere."""

    type = "laminate"
    values: Sequence[float] = (1.0, 3.0)
    axis: int = 0
    fraction: float = 0.5
    holder_alpha: float = 0.5

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != 2:
            raise ConfigInvalid("a laminate needs exactly two values", key="coefficient.values")
        if not 0 < self.fraction < 1:
            raise ConfigInvalid(f"fraction must be in ]0, 1[, got {self.fraction}", key="coefficient.fraction")
        object.__setattr__(self, "values", values)
        _require_positive(self.ellipticity)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        dim = points.shape[-1]
        if self.axis >= dim:
            raise ConfigInvalid(f"laminate axis {self.axis} does not exist for d = {dim}", key="coefficient.axis")
        x = points[..., self.axis]
        values = np.where(x - np.floor(x) < self.fraction, self.values[0], self.values[1])
        return _isotropic(values, dim)

    @property
    def ellipticity(self):
        return min(self.values)

    @property
    def upper_bound(self):
        return max(self.values)

    @property
    def has_unit_period(self):
        return True


@dataclasses.dataclass(frozen=True)
class RadialLogOsc(Coefficient):
    """base + amplitude·sin(ln(1 + |x|))."""

    type = "radial_log_osc"
    base: float = 2.0
    amplitude: float = 1.0
    holder_alpha: float = 0.5

    def __post_init__(self):
        _require_positive(self.ellipticity)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        values = self.base + self.amplitude * np.sin(np.log1p(_radii(points)))
        return _isotropic(values, points.shape[-1])

    def evaluate_rescaled(self, points, eps, log_domain=None):
        points = np.asarray(points, dtype=float)
        if not (eps.is_sequence if log_domain is None else log_domain):
            return self.evaluate(_scaled_points(points, eps, self.type))
        _, phase, _ = _log1p_ratio(_radii(points), eps)
        return _isotropic(self.base + self.amplitude * np.sin(phase), points.shape[-1])

    @property
    def ellipticity(self):
        return self.base - abs(self.amplitude)

    @property
    def upper_bound(self):
        return self.base + abs(self.amplitude)


@dataclasses.dataclass(frozen=True)
class RadialIterLogOsc(Coefficient):
    """base + amplitude·sin(ln(1 + ln(1 + |x|)))."""

    type = "radial_iter_log_osc"
    base: float = 2.0
    amplitude: float = 1.0
    holder_alpha: float = 0.5

    def __post_init__(self):
        _require_positive(self.ellipticity)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        values = self.base + self.amplitude * np.sin(np.log1p(np.log1p(_radii(points))))
        return _isotropic(values, points.shape[-1])

    def evaluate_rescaled(self, points, eps, log_domain=None):
        points = np.asarray(points, dtype=float)
        if not (eps.is_sequence if log_domain is None else log_domain):
            return self.evaluate(_scaled_points(points, eps, self.type))
        value, _, log_r = _log1p_ratio(_radii(points), eps)
        # 1 + ln(1 + r/ε) = -ln ε · (1 + (1 + t)/(-ln ε)) with t = ln r + ln(1 + ε/r)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = value - eps.neg_log
            use_split = (eps.neg_log > 1) & (log_r + eps.neg_log > 0)
            split = eps.log_neg_log_phase + np.log1p((1 + t) / eps.neg_log)
            if not math.isfinite(eps.neg_log):
                split = np.full_like(value, eps.log_neg_log_phase)
            direct = np.log1p(value)
        phase = np.where(use_split, split, direct)
        return _isotropic(self.base + self.amplitude * np.sin(phase), points.shape[-1])

    @property
    def ellipticity(self):
        return self.base - abs(self.amplitude)

    @property
    def upper_bound(self):
        return self.base + abs(self.amplitude)


@dataclasses.dataclass(frozen=True)
class PerturbedPeriodic(Coefficient):
    """A periodic coefficient plus an isotropic perturbation ã decaying away from ``center``.

    ``profile`` is ``algebraic`` for ã = amplitude·(1 + |x - center|/width)^(-decay), or ``bump`` for the
    compactly supported amplitude·exp(1 - 1/(1 - ρ²)), ρ = |x - center|/width < 1.
    """

    type = "perturbed_periodic"
    periodic: Coefficient = dataclasses.field(default_factory=lambda: Constant(1.0))
    amplitude: float = 0.5
    width: float = 1.0
    decay: float = 2.0
    center: Sequence[float] = (0.0, 0.0)
    profile: str = "algebraic"
    holder_alpha: float = 0.5

    def __post_init__(self):
        if isinstance(self.periodic, dict):
            object.__setattr__(self, "periodic", from_config(self.periodic))
        if not self.periodic.has_unit_period:
            raise ConfigInvalid(f"'{self.periodic.type}' is not Q-periodic", key="coefficient.periodic")
        if self.profile not in ("algebraic", "bump"):
            raise ConfigInvalid(f"unknown profile '{self.profile}'", key="coefficient.profile")
        if self.width <= 0:
            raise ConfigInvalid(f"width must be positive, got {self.width}", key="coefficient.width")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        _require_positive(self.ellipticity)

    def perturbation(self, points: np.ndarray) -> np.ndarray:
        """ã at ``points`` as scalars."""
        points = np.asarray(points, dtype=float)
        dim = points.shape[-1]
        center = np.zeros(dim)
        center[: min(dim, len(self.center))] = self.center[:dim]
        rho = _radii(points - center) / self.width
        if self.profile == "algebraic":
            return self.amplitude * (1.0 + rho) ** (-self.decay)
        inside = rho < 1
        with np.errstate(divide="ignore", over="ignore"):
            bump = np.exp(1.0 - 1.0 / (1.0 - np.where(inside, rho, 0.0) ** 2))
        return self.amplitude * np.where(inside, bump, 0.0)

    def evaluate_perturbation(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return _isotropic(self.perturbation(points), points.shape[-1])

    def evaluate(self, points):
        return self.periodic.evaluate(points) + self.evaluate_perturbation(points)

    def evaluate_rescaled(self, points, eps, log_domain=None):
        scaled = _scaled_points(points, eps, self.type)
        return self.periodic.evaluate(scaled) + self.evaluate_perturbation(scaled)

    @property
    def ellipticity(self):
        return self.periodic.ellipticity + min(0.0, self.amplitude)

    @property
    def upper_bound(self):
        return self.periodic.upper_bound + max(0.0, self.amplitude)


@dataclasses.dataclass(frozen=True)
class Tabulated(Coefficient):
    """Piecewise-constant coefficient read from a sampled field.

    With ``periodic`` the field must cover exactly one unit cell and is extended by Q-periodicity.
    """

    type = "tabulated"
    field: MatrixField = None
    periodic: bool = False
    path: Optional[str] = None
    holder_alpha: float = 0.5

    def __post_init__(self):
        if self.field is None:
            if self.path is None:
                raise ConfigInvalid("tabulated coefficient needs a field or a path", key="coefficient.path")
            from homoglab.fields_io import load_matrix_field

            object.__setattr__(self, "field", load_matrix_field(self.path))
        grid = self.field.grid
        if self.periodic:
            n = grid.cells_per_unit
            if tuple(grid.cells) != (n,) * grid.dim:
                raise GridMisaligned("a periodic tabulated coefficient must cover exactly one unit cell")
            grid.lattice_offset()
        _require_positive(self.ellipticity)

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        grid = self.field.grid
        n = grid.cells_per_unit
        index = []
        for axis in range(grid.dim):
            i = np.floor((points[..., axis] - grid.origin[axis]) * n).astype(np.int64)
            if self.periodic:
                i = np.mod(i, n)
            elif i.size and (i.min() < 0 or i.max() >= grid.cells[axis]):
                raise DomainTooSmall(f"tabulated coefficient is not defined outside {grid.origin}..{grid.upper}")
            index.append(i)
        return self.field.values[tuple(index)]

    @property
    def ellipticity(self):
        return float(self.field.eigenvalues().min())

    @property
    def upper_bound(self):
        return float(self.field.eigenvalues().max())

    @property
    def has_unit_period(self):
        return self.periodic

    def to_config(self) -> Dict[str, Any]:
        return {"type": self.type, "periodic": self.periodic, "path": self.path, "holder_alpha": self.holder_alpha}


ALL = [Constant, PeriodicTrig, Laminate, RadialLogOsc, RadialIterLogOsc, PerturbedPeriodic, Tabulated]
BY_TYPE = {cls.type: cls for cls in ALL}
