import torch

from dualquant.core import Grid, NormSpec, as_point, norm_eval
from dualquant.dq import local_error, local_error_extended


def envelope_gradient(grid: Grid, site, p: float, norm="l2", extended: bool = False) -> torch.Tensor:
    r"""Gradient of :math:`F_p^p(\xi; \Gamma)` with respect to the grid points

    By the envelope theorem applied to the Lagrangian of the barycentric program

    .. math::

        \nabla_{x_i} F_p^p(\xi; \Gamma) = \lambda^*_i \left( \nabla_{x_i} \|\xi - x_i\|^p - y \right)

    where :math:`y` is the multiplier of :math:`\sum_i \lambda_i x_i = \xi`. Outside the hull (``extended``)
    only the nearest point has a nonzero gradient. A site of the grid has zero cost, the minimum, and gets the
    zero subgradient.

    Parameters
    ----------
    grid : `dualquant.core.Grid`

    site : `torch.Tensor`

    p : float

    norm : `dualquant.core.NormSpec`

    extended : bool

    Returns
    -------
    `torch.Tensor`
        tensor of shape :math:`(n, d)`
    """
    norm = NormSpec(norm)
    site = as_point(site, dim=grid.dim)
    result = local_error_extended(site, grid, p, norm) if extended else local_error(site, grid, p, norm)
    grad = torch.zeros_like(grid.points)
    if result.value_p == 0.0:
        return grad

    if result.is_interior:
        cert = result.certificate
        idx = list(cert.support)
        diff = site - grid.points[idx]
        cost_grad = -p * norm_eval(diff, norm).pow(p - 1)[:, None] * norm.gradient(diff)
        grad[idx] = cert.weights[:, None] * (cost_grad - cert.duals[:-1])
    else:
        i = result.nearest_index
        diff = site - grid.points[i]
        grad[i] = -p * norm_eval(diff, norm).pow(p - 1) * norm.gradient(diff)
    return grad


def sgd_step(grid: Grid, sample, p: float, norm, step: float, extended: bool = False) -> Grid:
    r"""One stochastic gradient step :math:`x_i \leftarrow x_i - \gamma \nabla_{x_i} F_p^p(\xi; \Gamma)`

    Only the points of the certificate support move (the nearest point outside the hull in ``extended`` mode).

    Parameters
    ----------
    grid : `dualquant.core.Grid`

    sample : `torch.Tensor`
        the site :math:`\xi`

    p : float

    norm : `dualquant.core.NormSpec`

    step : float
        the step :math:`\gamma > 0`

    extended : bool

    Returns
    -------
    `dualquant.core.Grid`

    Examples
    --------
    >>> sgd_step(Grid([0.0, 1.0]), [0.0], 2, "l2", 0.1).points.flatten().tolist()
    [0.0, 1.0]
    """
    return Grid(grid.points - step * envelope_gradient(grid, sample, p, norm, extended))
