__version__ = "0.1.0"


from typing import Dict, Union


_TOLERANCE_DEFAULTS: Dict[str, Union[float, int]] = dict(
    feasibility=1e-9,
    optimality=1e-9,
    duplicate=1e-12,
    stall=50,
    max_pivots=500,
)


def set_tolerance_defaults(**kwargs) -> None:
    r"""Globally set the default numerical tolerances.

    Parameters
    ----------
    **kwargs
        Keyword arguments among ``feasibility``, ``optimality``, ``duplicate``, ``stall`` and ``max_pivots``.
    """
    for k, v in kwargs.items():
        if k not in _TOLERANCE_DEFAULTS:
            raise ValueError(f"Unknown tolerance option: {k}")
        _TOLERANCE_DEFAULTS[k] = v


def get_tolerance_defaults() -> Dict[str, Union[float, int]]:
    r"""Get the global default numerical tolerances."""
    return dict(_TOLERANCE_DEFAULTS)


from dualquant import core as core  # noqa: F401, E402
from dualquant import lp as lp  # noqa: F401, E402
from dualquant import structured as structured  # noqa: F401, E402
from dualquant import dq as dq  # noqa: F401, E402
from dualquant import pierce as pierce  # noqa: F401, E402
from dualquant import optimize as optimize  # noqa: F401, E402
from dualquant import harness as harness  # noqa: F401, E402
