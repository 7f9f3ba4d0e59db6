""" Contains all the report models emitted by the numerical modules """

from .contraction_trace import ContractionTrace
from .decay_fit import DecayFit
from .decomposition_summary import DecompositionSummary
from .gns_report import GnsReport
from .homogenized_tensor import HomogenizedTensor
from .norm_report import NormReport
from .slope_fit import SlopeFit
from .solve_stats import SolveStats
from .subsequence_report import SubsequenceReport
from .sweep_report import SweepReport

__all__ = (
    "ContractionTrace",
    "DecayFit",
    "DecompositionSummary",
    "GnsReport",
    "HomogenizedTensor",
    "NormReport",
    "SlopeFit",
    "SolveStats",
    "SubsequenceReport",
    "SweepReport",
)
