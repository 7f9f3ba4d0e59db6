class ConfigurationError(Exception):
    pass


class ConfigInvalid(ConfigurationError):
    def __init__(self, message: str, key: str = None):
        self.key = key
        super().__init__(message if key is None else f"{key}: {message}")


class ScenarioUnknown(ConfigurationError):
    def __init__(self, name: str, registry: list):
        self.name = name
        self.registry = list(registry)
        super().__init__(f"Unknown scenario '{name}'. Known scenarios: {', '.join(self.registry)}")


class HomoglabException(Exception):
    """Base class for errors raised by the numerical modules.

    `module` is filled in by `homoglab.decorators.track` with the name of the
    module whose public operation raised the error.
    """

    module: str = None


class NumericalFailure(HomoglabException):
    pass


class EllipticityViolation(NumericalFailure):
    def __init__(self, lambda_min: float, floor: float):
        self.lambda_min = lambda_min
        self.floor = floor
        super().__init__(f"Smallest eigenvalue {lambda_min:.6g} is below the ellipticity floor {floor:.6g}")


class NonFinite(NumericalFailure):
    pass


class GridTooSmall(NumericalFailure):
    pass


class GridMisaligned(NumericalFailure):
    pass


class ExponentOutOfRange(NumericalFailure):
    pass


class IncompatibleField(NumericalFailure):
    def __init__(self, defect: float, tolerance: float):
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(f"Discrete Cauchy compatibility fails: defect {defect:.3e} > {tolerance:.3e}")


class InsufficientRadii(NumericalFailure):
    pass


class InsufficientPoints(NumericalFailure):
    pass


class DomainTooSmall(NumericalFailure):
    pass


class Singular(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"No convergence after {iterations} iterations (relative residual {residual:.3e})")


class TruncationUnstable(NumericalFailure):
    def __init__(self, relative_change: float):
        self.relative_change = relative_change
        super().__init__(f"Solutions on R and R/2 differ by {relative_change:.2%} on the inner window")


class NotContracting(NumericalFailure):
    def __init__(self, ratios: list):
        self.ratios = list(ratios)
        super().__init__(f"Fixed-point iteration is not contracting (ratios {', '.join(f'{r:.3f}' for r in ratios)})")


class ResolutionMismatch(NumericalFailure):
    pass


class ResolutionInsufficient(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class DisconnectedWarning(UserWarning):
    pass


class NonConvergentWarning(UserWarning):
    pass


class DegenerateFitWarning(UserWarning):
    pass
