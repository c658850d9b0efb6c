from ._local import (
    OutsideHull,
    LocalErrorResult,
    barycentric_costs,
    local_error,
    local_error_extended,
    nearest_neighbor_project,
    split,
)
from ._oracle import TooLarge, local_error_bruteforce
from ._distortion import (
    AnyGrid,
    DistortionReport,
    evaluate_costs,
    estimate_distortion,
    estimate_functionals,
)


__all__ = [
    "OutsideHull",
    "LocalErrorResult",
    "barycentric_costs",
    "local_error",
    "local_error_extended",
    "nearest_neighbor_project",
    "split",
    "TooLarge",
    "local_error_bruteforce",
    "AnyGrid",
    "DistortionReport",
    "evaluate_costs",
    "estimate_distortion",
    "estimate_functionals",
]
