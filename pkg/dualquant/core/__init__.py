from ._norm import NormSpec, norm_eval
from ._grid import Grid, as_point
from ._rng import RngStream
from ._distribution import (
    DistributionSpec,
    UniformCube,
    UniformCubeUnion,
    Gaussian,
    Exponential,
    Pareto,
    Empirical,
    SHARD_SIZE,
    sample,
    pareto_order_statistics,
)


__all__ = [
    "NormSpec",
    "norm_eval",
    "Grid",
    "as_point",
    "RngStream",
    "DistributionSpec",
    "UniformCube",
    "UniformCubeUnion",
    "Gaussian",
    "Exponential",
    "Pareto",
    "Empirical",
    "SHARD_SIZE",
    "sample",
    "pareto_order_statistics",
]
