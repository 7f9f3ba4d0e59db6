import contextvars
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from contextvars import ContextVar
from typing import Callable, Iterable, List, Optional, TypeVar

from homoglab.exceptions import ConfigInvalid

_local = ContextVar("homoglab_lab")

AVERAGING_CHOICES = ("harmonic", "arithmetic")


@dataclasses.dataclass
class Settings:
    tolerance: float = 1e-10
    averaging: str = "harmonic"
    jobs: int = 1
    max_iterations: Optional[int] = None

    def iteration_cap(self, unknowns: int) -> int:
        if self.max_iterations:
            return self.max_iterations
        return int(50 * unknowns**0.5) + 10_000

    def as_dict(self):
        return dataclasses.asdict(self)

    def __str__(self):
        return (
            f"Settings(tolerance={self.tolerance:g},"
            f" averaging='{self.averaging}',"
            f" jobs={self.jobs},"
            f" max_iterations={self.max_iterations})"
        )


class Scope:
    """Scope holds provenance data which will be embedded in every report produced within the current scope.

    Entering the scope pushes a copy of the current context so nested scopes can add keys that disappear again
    on exit.
    """

    def __init__(self):
        self.stack = []
        self.context = {}

    def __enter__(self):
        self.stack.append(self.context)
        self.context = self.context.copy()
        return self

    def __exit__(self, *args):
        self.context = self.stack.pop()

    def __setitem__(self, key, value):
        self.context[key] = value


class LabMeta(type):
    @property
    def current(cls):
        # Settings bound in a parent thread are not visible to worker threads that were started
        # before the binding; workers started afterwards copy the context explicitly.
        lab = _local.get(None)
        if lab is None:
            lab = Lab(GLOBAL_LAB)
            _local.set(lab)
        return lab


class Lab(metaclass=LabMeta):
    def __init__(self, settings_or_lab=None):
        if isinstance(settings_or_lab, Lab):
            self.settings = settings_or_lab.settings
        else:
            self.settings = settings_or_lab or Settings()

        self._scope = Scope()

    def bind(self, settings: Settings):
        self.settings = settings or Settings()

    def scope(self) -> Scope:
        return self._scope


def init(tolerance: float = None, averaging: str = None, jobs: int = None, max_iterations: int = None) -> Settings:
    """Bind solver settings for the current context.

    Arguments left as None keep their defaults.
    """
    settings = Settings()
    if tolerance is not None:
        if not 0 < tolerance <= 1e-2:
            raise ConfigInvalid(f"must be in (0, 1e-2], got {tolerance}", key="solver.tolerance")
        settings.tolerance = float(tolerance)
    if averaging is not None:
        if averaging not in AVERAGING_CHOICES:
            raise ConfigInvalid(f"must be one of {', '.join(AVERAGING_CHOICES)}", key="solver.averaging")
        settings.averaging = averaging
    if jobs is not None:
        if jobs < 1:
            raise ConfigInvalid(f"must be >= 1, got {jobs}", key="jobs")
        settings.jobs = int(jobs)
    if max_iterations is not None:
        settings.max_iterations = int(max_iterations)
    Lab.current.bind(settings)
    return settings


def current_settings() -> Settings:
    return Lab.current.settings


GLOBAL_LAB = Lab()
_local.set(GLOBAL_LAB)


R = TypeVar("R")


def map_jobs(func: Callable[..., R], items: Iterable) -> List[R]:
    """Apply ``func`` to every item on up to ``Settings.jobs`` threads, returning results in input order.

    Each worker runs in a copy of the caller's context so it sees the bound settings and scope.
    """
    items = list(items)
    jobs = current_settings().jobs
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(contextvars.copy_context().run, func, item) for item in items]
        return [future.result() for future in futures]
