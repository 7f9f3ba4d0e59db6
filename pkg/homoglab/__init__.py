from .coefficients import from_config as coefficient_from_config
from .config import ScenarioConfig, load_config
from .decorators import track
from .grid_fields import EpsDescriptor, Grid, MatrixField, ScalarField, VectorField
from .lab import Lab, Settings, init

import importlib.metadata as importlib_metadata

try:
    __version__ = importlib_metadata.version(__name__)
except importlib_metadata.PackageNotFoundError:
    __version__ = "dev"


def current_scope():
    return Lab.current.scope()
