r"""Local dual quantization error and the splitting operator

For a grid :math:`\Gamma = \{x_1, \dots, x_n\}` and a site :math:`\xi \in \mathrm{conv}(\Gamma)`

.. math::

    F_p^p(\xi; \Gamma) = \min \left\{ \sum_i \lambda_i \|\xi - x_i\|^p : \lambda \geq 0, \sum_i \lambda_i x_i = \xi,
    \sum_i \lambda_i = 1 \right\}

and the extended error :math:`\bar F_p` equals :math:`F_p` on the hull and :math:`\mathrm{dist}(\xi, \Gamma)` outside.
"""
import dataclasses
import math
from typing import Optional, Tuple

import torch

from dualquant.core import Grid, RngStream, as_point, norm_eval
from dualquant.lp import BarycentricCertificate, BarycentricProblem, Infeasible, solve_barycentric_min

# costs are rescaled in the log domain beyond this exponent
_LOG_DOMAIN_P = 16.0


class OutsideHull(Infeasible):
    r"""The site is outside the convex hull of the grid"""


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def barycentric_costs(site, grid: Grid, p: float, norm) -> Tuple[torch.Tensor, float]:
    r"""Costs :math:`c_i = \|\xi - x_i\|^p`

    Returns
    -------
    costs : `torch.Tensor`
        tensor of shape :math:`(n)`, divided by :math:`e^{s}`

    s : float
        the log scale, zero unless :math:`p > 16`
    """
    p = _check_p(p)
    site = as_point(site, dim=grid.dim)
    dist = norm_eval(grid.points - site, norm)
    if p <= _LOG_DOMAIN_P:
        return dist.pow(p), 0.0
    log_costs = p * dist.log()
    log_scale = log_costs.max().item()
    if math.isinf(log_scale):
        return torch.zeros_like(dist), 0.0
    return (log_costs - log_scale).exp(), log_scale


@dataclasses.dataclass(frozen=True)
class LocalErrorResult:
    r"""Value of :math:`F_p^p` or :math:`\bar F_p^p` at a site

    Attributes
    ----------
    value_p : float
        the :math:`p`-th power of the error

    branch : str
        ``"interior"`` or ``"exterior"``

    certificate : `dualquant.lp.BarycentricCertificate`, optional
        the optimal weights, interior branch only

    nearest_index : int, optional
        the closest grid point, exterior branch only

    p : float
    """

    value_p: float
    branch: str
    certificate: Optional[BarycentricCertificate]
    nearest_index: Optional[int]
    p: float

    @property
    def value(self) -> float:
        r"""The error itself, :math:`(\mathrm{value\_p})^{1/p}`"""
        return self.value_p ** (1.0 / self.p)

    @property
    def is_interior(self) -> bool:
        return self.branch == "interior"


def local_error(site, grid: Grid, p: float, norm="l2") -> LocalErrorResult:
    r"""Local dual quantization error :math:`F_p^p(\xi; \Gamma)`

    Parameters
    ----------
    site : `torch.Tensor` or sequence of float
        the point :math:`\xi`

    grid : `dualquant.core.Grid`

    p : float
        exponent :math:`p \geq 1`

    norm : `dualquant.core.NormSpec`

    Returns
    -------
    `LocalErrorResult`
        interior branch, with the certificate of the barycentric program

    Raises
    ------
    `OutsideHull`
        if :math:`\xi \notin \mathrm{conv}(\Gamma)`, use `local_error_extended` there

    Examples
    --------
    >>> round(local_error([0.25], Grid([0.0, 1.0]), 2).value_p, 12)
    0.1875
    """
    p = _check_p(p)
    site = as_point(site, dim=grid.dim)
    costs, log_scale = barycentric_costs(site, grid, p, norm)
    try:
        cert = solve_barycentric_min(BarycentricProblem(site, grid, costs))
    except Infeasible as e:
        raise OutsideHull(str(e)) from e

    if log_scale != 0.0:
        factor = math.exp(log_scale)
        cert = dataclasses.replace(
            cert,
            value=cert.value * factor,
            duals=cert.duals * factor,
            min_reduced_cost=cert.min_reduced_cost * factor,
        )
    return LocalErrorResult(value_p=cert.value, branch="interior", certificate=cert, nearest_index=None, p=p)


def nearest_neighbor_project(site, grid: Grid, norm="l2") -> Tuple[int, float]:
    r"""Closest grid point, the lowest index among ties

    Returns
    -------
    index : int

    distance : float

    Examples
    --------
    >>> nearest_neighbor_project([0.5], Grid([0.0, 1.0]))
    (0, 0.5)
    """
    site = as_point(site, dim=grid.dim)
    dist = norm_eval(grid.points - site, norm)
    i = dist.argmin().item()
    return i, dist[i].item()


def local_error_extended(site, grid: Grid, p: float, norm="l2") -> LocalErrorResult:
    r"""Extended local error :math:`\bar F_p^p(\xi; \Gamma)`

    Sites of the hull, its boundary included, take the interior branch.
    Other sites get :math:`\mathrm{dist}(\xi, \Gamma)^p`.

    Returns
    -------
    `LocalErrorResult`

    Examples
    --------
    >>> r = local_error_extended([2.0], Grid([0.0, 1.0]), 3)
    >>> r.branch, r.value_p
    ('exterior', 1.0)
    """
    p = _check_p(p)
    try:
        return local_error(site, grid, p, norm)
    except OutsideHull:
        pass
    i, dist = nearest_neighbor_project(site, grid, norm)
    return LocalErrorResult(value_p=dist**p, branch="exterior", certificate=None, nearest_index=i, p=p)


def split(
    site,
    grid: Grid,
    p: float,
    norm,
    rng: RngStream,
    count: Optional[int] = None,
    extended: bool = False,
) -> torch.Tensor:
    r"""Intrinsic stationary splitting operator :math:`J^*_\Gamma`

    Returns the grid point :math:`x_i` with probability :math:`\lambda^*_i`, the optimal weights of
    `local_error`, so that :math:`\mathbb{E}[J^*_\Gamma(\xi)] = \xi`.
    The support index is the first :math:`i` with :math:`U < \lambda^*_1 + \dots + \lambda^*_i`.

    Parameters
    ----------
    site : `torch.Tensor`
        the point :math:`\xi`

    grid : `dualquant.core.Grid`

    p : float

    norm : `dualquant.core.NormSpec`

    rng : `dualquant.core.RngStream`
        source of the uniform variables :math:`U`

    count : int, optional
        number of independent splits, by default a single one

    extended : bool
        if ``True``, sites outside the hull map to their nearest neighbour instead of raising

    Returns
    -------
    `torch.Tensor`
        a point of shape :math:`(d)`, or a tensor of shape :math:`(\mathrm{count}, d)`

    Raises
    ------
    `OutsideHull`
        if :math:`\xi \notin \mathrm{conv}(\Gamma)` and ``extended`` is ``False``
    """
    result = local_error_extended(site, grid, p, norm) if extended else local_error(site, grid, p, norm)
    n = 1 if count is None else int(count)
    if n < 1:
        raise ValueError(f"count must be >= 1, got {count}")

    if result.is_interior:
        cert = result.certificate
        u = torch.rand(n, generator=rng.generator(), dtype=torch.float64)
        cumulative = cert.weights.cumsum(0)
        j = torch.searchsorted(cumulative, u, right=True).clamp(max=len(cert.support) - 1)
        index = torch.tensor(cert.support)[j]
    else:
        index = torch.full((n,), result.nearest_index, dtype=torch.long)

    out = grid.points[index]
    return out[0] if count is None else out
