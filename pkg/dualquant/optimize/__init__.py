from ._config import OptimizationResult, OptimizerConfig
from ._gradient import envelope_gradient, sgd_step
from ._exhaustive import exhaustive_1d, interval_cost
from ._optimizer import Diverged, TooFewPoints, optimize_grid, regular_quantization_distortion

__all__ = [
    "OptimizerConfig",
    "OptimizationResult",
    "envelope_gradient",
    "sgd_step",
    "exhaustive_1d",
    "interval_cost",
    "TooFewPoints",
    "Diverged",
    "optimize_grid",
    "regular_quantization_distortion",
]
