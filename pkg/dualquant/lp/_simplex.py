r"""Dense revised simplex for the barycentric program

.. math::

    \min_{\lambda \geq 0} \sum_i \lambda_i c_i \quad \text{s.t.} \quad \sum_i \lambda_i x_i = \xi, \quad \sum_i \lambda_i = 1

The constraint matrix has :math:`d + 1` rows, so the basis is refactored at every pivot.
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import torch

import dualquant
from dualquant.core import Grid, as_point

logger = logging.getLogger(__name__)

_PIVOT_EPS = 1e-12


class Infeasible(ValueError):
    r"""The site is not in the convex hull of the grid"""


class NumericalFailure(RuntimeError):
    r"""The pivoting broke down even with Bland's rule"""


class _PivotLimit(Exception):
    pass


@dataclass(frozen=True)
class BarycentricProblem:
    r"""Data of the barycentric program

    Parameters
    ----------
    site : `torch.Tensor`
        the point :math:`\xi` of shape :math:`(d)`

    grid : `dualquant.core.Grid`
        the points :math:`x_1, \dots, x_n`

    costs : `torch.Tensor`
        the costs :math:`c_i \geq 0` of shape :math:`(n)`, usually :math:`\|\xi - x_i\|^p`
    """

    site: torch.Tensor
    grid: Grid
    costs: torch.Tensor

    def __post_init__(self) -> None:
        object.__setattr__(self, "site", as_point(self.site, dim=self.grid.dim))
        costs = torch.as_tensor(self.costs, dtype=torch.float64).reshape(-1)
        if costs.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} costs, got {costs.numel()}")
        if not torch.isfinite(costs).all() or (costs < 0).any():
            raise ValueError("costs must be finite and nonnegative")
        object.__setattr__(self, "costs", costs)


@dataclass(frozen=True)
class BarycentricCertificate:
    r"""Optimal vertex of the barycentric program

    Attributes
    ----------
    value : float
        the optimal objective :math:`\sum_{i \in I^*} \lambda^*_i c_i`

    support : tuple of int
        the indices :math:`I^*`, increasing, of affinely independent grid points

    weights : `torch.Tensor`
        the positive weights :math:`\lambda^*_i` on the support, summing to one

    basis : tuple of int
        the optimal basis, it may contain indices carrying a zero weight

    duals : `torch.Tensor`
        tensor of shape :math:`(d + 1)`, the multipliers :math:`y` of :math:`\sum_i \lambda_i x_i = \xi`
        followed by the multiplier of :math:`\sum_i \lambda_i = 1`

    min_reduced_cost : float
        smallest reduced cost :math:`c_j - y \cdot x_j - y_0` over the non-basic indices
    """

    value: float
    support: Tuple[int, ...]
    weights: torch.Tensor
    basis: Tuple[int, ...]
    duals: torch.Tensor
    min_reduced_cost: float

    def barycenter(self, grid: Grid) -> torch.Tensor:
        r""":math:`\sum_{i \in I^*} \lambda^*_i x_i`"""
        return self.weights @ grid.points[list(self.support)]


@dataclass
class _Restricted:
    A: torch.Tensor
    b: torch.Tensor
    center: torch.Tensor
    directions: torch.Tensor
    scale: float


def _restrict(site: torch.Tensor, points: torch.Tensor, tol: float) -> _Restricted:
    # express the constraints in an orthonormal basis of the affine hull of the points
    center = points.mean(0)
    centered = points - center
    scale = centered.abs().max().item()
    scale = scale if scale > 0 else 1.0

    _, s, vh = torch.linalg.svd(centered / scale, full_matrices=False)
    rank = int((s > 1e-10 * max(s.max().item(), 1e-300)).sum().item()) if s.numel() > 0 else 0
    directions = vh[:rank]

    z = (site - center) / scale
    coords = directions @ z
    residual = (z - directions.T @ coords).abs().max().item() * scale
    if residual > tol * (1.0 + site.abs().max().item()):
        raise Infeasible(f"site {site.tolist()} is off the affine hull of the grid (residual {residual:.3e})")

    A = torch.cat([(centered / scale) @ directions.T, torch.ones(len(points), 1, dtype=torch.float64)], dim=1).T
    b = torch.cat([coords, torch.ones(1, dtype=torch.float64)])
    return _Restricted(A.contiguous(), b, center, directions, scale)


def _pivot_loop(
    A: torch.Tensor,
    b: torch.Tensor,
    c: torch.Tensor,
    basis: List[int],
    ncols: int,
    opt_tol: float,
    stall: int,
    max_pivots: int,
    bland: bool,
):
    degenerate = 0
    columns = torch.arange(ncols)
    for _ in range(max_pivots):
        B = A[:, basis]
        try:
            x_B = torch.linalg.solve(B, b).clamp(min=0.0)
            y = torch.linalg.solve(B.T, c[basis])
        except RuntimeError as e:
            raise NumericalFailure(f"singular basis {basis}") from e
        reduced = c[:ncols] - A[:, :ncols].T @ y
        nonbasic = torch.ones(ncols, dtype=torch.bool)
        nonbasic[basis] = False

        candidates = columns[nonbasic & (reduced < -opt_tol)]
        if len(candidates) == 0:
            return basis, x_B, y, reduced, nonbasic

        if bland:
            entering = candidates[0].item()
        else:
            # argmin returns the lowest index among ties
            masked = torch.where(nonbasic, reduced, torch.full_like(reduced, float("inf")))
            entering = masked.argmin().item()

        u = torch.linalg.solve(B, A[:, entering])
        rows = (u > _PIVOT_EPS).nonzero().flatten()
        if len(rows) == 0:
            raise NumericalFailure(f"unbounded direction on column {entering}")
        ratios = x_B[rows] / u[rows]
        theta = ratios.min()
        ties = rows[ratios <= theta + _PIVOT_EPS].tolist()
        leaving = min(ties, key=lambda r: basis[r])

        if theta.item() <= _PIVOT_EPS:
            degenerate += 1
            if not bland and degenerate >= stall:
                logger.debug("%d degenerate pivots, switching to Bland's rule", degenerate)
                bland = True
        else:
            degenerate = 0
        basis[leaving] = entering

    raise _PivotLimit()


def _solve(A, b, c, basis, ncols, tol, what: str):
    try:
        return _pivot_loop(A, b, c, list(basis), ncols, tol["optimality"], tol["stall"], tol["max_pivots"], False)
    except _PivotLimit:
        logger.debug("%s: pivot limit reached, restarting with Bland's rule", what)
    try:
        return _pivot_loop(A, b, c, list(basis), ncols, tol["optimality"], tol["stall"], tol["max_pivots"], True)
    except _PivotLimit:
        raise NumericalFailure(f"{what}: no convergence after {tol['max_pivots']} pivots with Bland's rule")


def _phase_one(site: torch.Tensor, restricted: _Restricted, tol):
    A, b = restricted.A, restricted.b
    m, n = A.shape
    sign = torch.where(b < 0, -1.0, 1.0).to(torch.float64)
    A = sign[:, None] * A
    b = sign * b

    full = torch.cat([A, torch.eye(m, dtype=torch.float64)], dim=1)
    cost = torch.cat([torch.zeros(n, dtype=torch.float64), torch.ones(m, dtype=torch.float64)])
    basis, x_B, _, _, _ = _solve(full, b, cost, list(range(n, n + m)), n + m, tol, "phase I")

    infeasibility = (cost[basis] * x_B).sum().item() * max(restricted.scale, 1.0)
    if infeasibility > tol["feasibility"] * (1.0 + site.abs().max().item()):
        raise Infeasible(f"site {site.tolist()} is outside the convex hull of the grid")

    # drive the artificial variables out of the basis, drop the redundant rows
    rows = list(range(m))
    r = 0
    while r < len(basis):
        if basis[r] < n:
            r += 1
            continue
        B = full[rows][:, basis]
        e = torch.zeros(len(basis), dtype=torch.float64)
        e[r] = 1.0
        tableau_row = torch.linalg.solve(B.T, e) @ full[rows][:, :n]
        tableau_row[[j for j in basis if j < n]] = 0.0
        j = tableau_row.abs().argmax().item()
        if tableau_row[j].abs() > 1e-9:
            basis[r] = j
            r += 1
        else:
            del rows[r]
            del basis[r]

    return A[rows], b[rows], sign[rows], rows, basis


def _phase_one_or_raise(site, grid, tol):
    restricted = _restrict(site, grid.points, tol["feasibility"])
    return restricted, _phase_one(site, restricted, tol)


def solve_barycentric_min(problem: BarycentricProblem) -> BarycentricCertificate:
    r"""Solve the barycentric program

    .. math::

        F(\xi) = \min \left\{ \sum_i \lambda_i c_i : \lambda \geq 0, \sum_i \lambda_i x_i = \xi, \sum_i \lambda_i = 1 \right\}

    Phase I uses artificial variables, phase II starts from the phase I basis.
    Pricing is Dantzig's rule with the lowest index among ties, replaced by Bland's rule after
    ``stall`` consecutive degenerate pivots (see `dualquant.get_tolerance_defaults`).

    Parameters
    ----------
    problem : `BarycentricProblem`

    Returns
    -------
    `BarycentricCertificate`
        an optimal vertex

    Raises
    ------
    `Infeasible`
        if :math:`\xi` is not in the convex hull of the grid

    `NumericalFailure`
        if the pivoting does not terminate

    Examples
    --------
    >>> grid = Grid([0.0, 1.0])
    >>> cert = solve_barycentric_min(BarycentricProblem(torch.tensor([0.5]), grid, torch.tensor([0.25, 0.25])))
    >>> round(cert.value, 12)
    0.25
    """
    tol = dualquant.get_tolerance_defaults()
    site, grid, costs = problem.site, problem.grid, problem.costs
    restricted, (A, b, sign, rows, basis) = _phase_one_or_raise(site, grid, tol)
    n = grid.size

    cost_scale = costs.max().item()
    cost_scale = cost_scale if cost_scale > 0 else 1.0
    c = costs / cost_scale

    basis, x_B, y, reduced, nonbasic = _solve(A, b, c, basis, n, tol, "phase II")

    weights_full = torch.zeros(n, dtype=torch.float64)
    weights_full[basis] = x_B
    keep = weights_full > _PIVOT_EPS
    support = keep.nonzero().flatten()
    weights = weights_full[support]
    weights = weights / weights.sum()
    value = (weights * costs[support]).sum().item()

    # multipliers back to the original coordinates
    m = restricted.A.shape[0]
    y_full = torch.zeros(m, dtype=torch.float64)
    y_full[rows] = y * sign * cost_scale
    k = m - 1
    y_coords = restricted.directions.T @ y_full[:k] / restricted.scale
    y_const = y_full[k] - y_coords @ restricted.center
    duals = torch.cat([y_coords, y_const[None]])

    min_reduced = (reduced[nonbasic] * cost_scale).min().item() if nonbasic.any() else 0.0

    return BarycentricCertificate(
        value=value,
        support=tuple(support.tolist()),
        weights=weights,
        basis=tuple(sorted(basis)),
        duals=duals,
        min_reduced_cost=min_reduced,
    )


def hull_contains(site, grid: Grid) -> bool:
    r"""Whether :math:`\xi \in \mathrm{conv}(\Gamma)`

    Runs phase I only. Points of the boundary are inside.

    Parameters
    ----------
    site : `torch.Tensor`
        the point :math:`\xi`

    grid : `dualquant.core.Grid`

    Returns
    -------
    bool

    Examples
    --------
    >>> square = Grid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    >>> hull_contains(torch.tensor([0.5, 0.0]), square)
    True
    >>> hull_contains(torch.tensor([2.0, 0.0]), square)
    False
    """
    site = as_point(site, dim=grid.dim)
    tol = dualquant.get_tolerance_defaults()
    lo = grid.points.min(0).values
    hi = grid.points.max(0).values
    slack = tol["feasibility"] * (1.0 + site.abs().max().item())
    if (site < lo - slack).any() or (site > hi + slack).any():
        return False
    try:
        _phase_one_or_raise(site, grid, tol)
    except Infeasible:
        return False
    return True
