from ._splitting import ERROR_FUNCTIONALS, KINDS, apply_splitting, a_pn, splitting_error
from ._scan import (
    MomentWarning,
    PierceScanRow,
    default_delta,
    one_sided_knots,
    random_knots,
    pierce_scan_1d,
    pierce_scan_product,
)


__all__ = [
    "ERROR_FUNCTIONALS",
    "KINDS",
    "apply_splitting",
    "a_pn",
    "splitting_error",
    "MomentWarning",
    "PierceScanRow",
    "default_delta",
    "one_sided_knots",
    "random_knots",
    "pierce_scan_1d",
    "pierce_scan_product",
]
