from ._interval import (
    OrderedGrid1D,
    OutsideRange,
    SpanMismatch,
    uniform_knots,
    midpoint_knots,
    local_error_1d,
    analytic_distortion_uniform_1d,
    dual_coefficient_1d,
    regular_coefficient_1d,
    optimal_regular_distortion_uniform_1d,
    coefficient_ratio_1d,
)
from ._product import ProductGrid, NormMismatch, lattice_grid, product_local_error, cubewise_grid


__all__ = [
    "OrderedGrid1D",
    "OutsideRange",
    "SpanMismatch",
    "uniform_knots",
    "midpoint_knots",
    "local_error_1d",
    "analytic_distortion_uniform_1d",
    "dual_coefficient_1d",
    "regular_coefficient_1d",
    "optimal_regular_distortion_uniform_1d",
    "coefficient_ratio_1d",
    "ProductGrid",
    "NormMismatch",
    "lattice_grid",
    "product_local_error",
    "cubewise_grid",
]
