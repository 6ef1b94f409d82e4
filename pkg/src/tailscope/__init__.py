"""tailscope: numerical checks of tail-sensitive Gaussian asymptotics for
marginals of concentrated high-dimensional measures."""

__version__ = "0.1.0"

from . import concentration, experiments, fixtures, laplace, radial, refdist, samplers
from .concentration import ConcentrationProfile, TailFit
from .radial import ErrorTerms, OutsideRegimeError, RadialDistribution
from .reporting import ColumnTable, DirectionSweepReport, TailRatioReport
from .samplers import BodySpec, SampleBatch

__all__ = [
    "BodySpec",
    "ColumnTable",
    "ConcentrationProfile",
    "DirectionSweepReport",
    "ErrorTerms",
    "OutsideRegimeError",
    "RadialDistribution",
    "SampleBatch",
    "TailFit",
    "TailRatioReport",
    "concentration",
    "experiments",
    "fixtures",
    "laplace",
    "radial",
    "refdist",
    "samplers",
]
