import itertools
import math

import torch

import dualquant
from dualquant.core import Grid, as_point

from ._local import OutsideHull, barycentric_costs, _check_p

MAX_ORACLE_POINTS = 12
MAX_ORACLE_DIM = 4


class TooLarge(ValueError):
    r"""The instance exceeds the combinatorial guard of the brute-force oracle"""


def local_error_bruteforce(site, grid: Grid, p: float, norm="l2") -> float:
    r"""Brute-force :math:`F_p^p(\xi; \Gamma)` by enumeration of the candidate supports

    Every affinely independent subset :math:`S` of at most :math:`d + 1` grid points with
    :math:`\xi \in \mathrm{conv}(S)` has unique barycentric weights; the minimum of their costs is
    the optimal value of the barycentric program.

    Parameters
    ----------
    site : `torch.Tensor`

    grid : `dualquant.core.Grid`
        at most 12 points of dimension at most 4

    p : float

    norm : `dualquant.core.NormSpec`

    Returns
    -------
    float
        the :math:`p`-th power :math:`F_p^p`

    Raises
    ------
    `TooLarge`
        beyond 12 points or 4 dimensions

    `OutsideHull`
        if no subset contains :math:`\xi`
    """
    if grid.size > MAX_ORACLE_POINTS or grid.dim > MAX_ORACLE_DIM:
        raise TooLarge(f"brute force is limited to n <= {MAX_ORACLE_POINTS}, d <= {MAX_ORACLE_DIM}, got {grid!r}")
    p = _check_p(p)
    site = as_point(site, dim=grid.dim)
    costs, log_scale = barycentric_costs(site, grid, p, norm)
    tol = dualquant.get_tolerance_defaults()["feasibility"]
    scale = 1.0 + site.abs().max().item() + grid.points.abs().max().item()

    target = torch.cat([site, torch.ones(1, dtype=torch.float64)])
    lifted = torch.cat([grid.points, torch.ones(grid.size, 1, dtype=torch.float64)], dim=1)

    best = float("inf")
    for k in range(1, min(grid.size, grid.dim + 1) + 1):
        subsets = torch.tensor(list(itertools.combinations(range(grid.size), k)))
        A = lifted[subsets].transpose(1, 2)  # [subset, d + 1, k]
        independent = torch.linalg.matrix_rank(A, rtol=1e-10) == k
        if not independent.any():
            continue
        subsets, A = subsets[independent], A[independent]

        weights = torch.linalg.lstsq(A, target.expand(len(A), -1)[..., None]).solution[..., 0]
        residual = (A @ weights[..., None])[..., 0] - target
        feasible = (residual.abs().amax(dim=1) <= tol * scale) & (weights >= -tol).all(dim=1)
        if not feasible.any():
            continue
        values = (weights.clamp(min=0.0) * costs[subsets]).sum(dim=1)
        best = min(best, values[feasible].min().item())

    if best == float("inf"):
        raise OutsideHull(f"site {site.tolist()} is outside the convex hull of the grid")
    return best * math.exp(log_scale)
