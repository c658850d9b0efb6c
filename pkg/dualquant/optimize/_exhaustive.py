r"""Exhaustive search of one-dimensional dual grids

On :math:`[a, b]` with gap :math:`\Delta = b - a` the local error is
:math:`F_p^p(\xi) = \left( (b - \xi)(\xi - a)^p + (\xi - a)(b - \xi)^p \right) / \Delta`, so the cost of an interval
under a piecewise constant density is a sum of closed forms built on

.. math::

    G(t) = \frac{\Delta t^{p+1}}{p+1} - \frac{t^{p+2}}{p+2}

The best knots among the points of a mesh are found by dynamic programming, then polished by L-BFGS-B.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.optimize
import torch

from dualquant.core import DistributionSpec, RngStream, UniformCube, UniformCubeUnion, sample
from dualquant.structured import OrderedGrid1D

logger = logging.getLogger(__name__)

_SAMPLED_MESH = 101


def _uniform_pieces(dist: DistributionSpec) -> Optional[List[Tuple[float, float, float]]]:
    # (lower, upper, density) of the constant pieces, None for other laws
    if isinstance(dist, UniformCube):
        lo = dist.corner.item()
        return [(lo, lo + dist.edge, 1.0 / dist.edge)]
    if isinstance(dist, UniformCubeUnion):
        return [(c, c + dist.edge, w / dist.edge) for c, w in zip(dist.corners[:, 0].tolist(), dist.weights.tolist())]
    return None


def _antiderivative(t: torch.Tensor, gap: torch.Tensor, p: float) -> torch.Tensor:
    return gap * t.pow(p + 1) / (p + 1) - t.pow(p + 2) / (p + 2)


def interval_cost(a: torch.Tensor, b: torch.Tensor, pieces, p: float) -> torch.Tensor:
    r"""Closed form of :math:`\int_a^b F_p^p(\xi) h(\xi) d\xi` for a piecewise constant density :math:`h`

    Parameters
    ----------
    a, b : `torch.Tensor`
        broadcastable interval ends, :math:`a < b`

    pieces : list of tuple
        ``(lower, upper, density)`` of each constant piece of :math:`h`

    p : float

    Returns
    -------
    `torch.Tensor`

    Examples
    --------
    >>> a, b = torch.tensor(0.0, dtype=torch.float64), torch.tensor(1.0, dtype=torch.float64)
    >>> round(interval_cost(a, b, [(0.0, 1.0, 1.0)], 2).item(), 12)
    0.166666666667
    """
    gap = b - a
    safe = torch.where(gap > 0, gap, torch.ones_like(gap))
    out = torch.zeros_like(gap)
    for lo, hi, density in pieces:
        u = torch.clamp(a, min=lo)
        v = torch.clamp(b, max=hi)
        inside = (v > u) & (gap > 0)
        u = torch.where(inside, u, a)
        v = torch.where(inside, v, a)
        part = (
            _antiderivative(v - a, safe, p)
            - _antiderivative(u - a, safe, p)
            + _antiderivative(b - u, safe, p)
            - _antiderivative(b - v, safe, p)
        )
        out = out + torch.where(inside, density * part / safe, torch.zeros_like(out))
    return out


def _sampled_cost(knots: torch.Tensor, xs: torch.Tensor, p: float) -> torch.Tensor:
    i = (torch.searchsorted(knots.detach(), xs, right=True) - 1).clamp(0, len(knots) - 2)
    left, right = knots[i], knots[i + 1]
    s = (xs - left).clamp(min=0.0)
    r = (right - xs).clamp(min=0.0)
    gap = right - left
    safe = torch.where(gap > 0, gap, torch.ones_like(gap))
    return torch.where(gap > 0, (r * s.pow(p) + s * r.pow(p)) / safe, torch.zeros_like(gap)).mean()


def _total_cost(knots: torch.Tensor, pieces, xs, p: float) -> torch.Tensor:
    if pieces is not None:
        return interval_cost(knots[:-1], knots[1:], pieces, p).sum()
    return _sampled_cost(knots, xs, p)


def _cost_matrix(mesh: torch.Tensor, pieces, xs, p: float) -> torch.Tensor:
    m = len(mesh)
    if pieces is not None:
        cost = interval_cost(mesh[:, None], mesh[None, :], pieces, p)
    else:
        cost = torch.zeros(m, m, dtype=torch.float64)
        for j in range(m - 1):
            a, b = mesh[j], mesh[j + 1 :]
            s = (xs[None, :] - a).clamp(min=0.0)
            r = (b[:, None] - xs[None, :]).clamp(min=0.0)
            inside = (xs[None, :] >= a) & (xs[None, :] <= b[:, None])
            local = torch.where(inside, (r * s.pow(p) + s * r.pow(p)) / (b - a)[:, None], torch.zeros_like(s))
            cost[j, j + 1 :] = local.sum(dim=1) / len(xs)
    upper = torch.ones(m, m, dtype=torch.bool).triu(diagonal=1)
    return torch.where(upper, cost, torch.full_like(cost, float("inf")))


def _dynamic_program(cost: torch.Tensor, n: int) -> Tuple[List[int], float]:
    # best path 0 -> m - 1 through n mesh points
    best = cost[0]
    parents = []
    for _ in range(n - 2):
        best, arg = (best[:, None] + cost).min(dim=0)
        parents.append(arg)
    path = [len(cost) - 1]
    for arg in reversed(parents):
        path.append(arg[path[-1]].item())
    path.append(0)
    return path[::-1], best[-1].item()


def exhaustive_1d(
    dist: DistributionSpec,
    n: int,
    p: float,
    mesh: int = 401,
    samples: int = 4096,
    rng: RngStream = RngStream(0),
) -> Tuple[OrderedGrid1D, List[float]]:
    r"""Optimal dual grid of size :math:`n` of a bounded law of the real line

    The first and last knots sit at the ends of the support. The interior knots are chosen among ``mesh``
    equispaced points by dynamic programming. Uniform laws and unions of intervals use the closed form and the
    knots are then polished with L-BFGS-B, other laws keep the mesh knots of the empirical measure of ``samples``
    draws.

    Parameters
    ----------
    dist : `dualquant.core.DistributionSpec`
        a bounded law of the real line

    n : int
        number of knots, at least 2

    p : float

    mesh : int

    samples : int
        draws used by laws without a closed form

    rng : `dualquant.core.RngStream`

    Returns
    -------
    grid : `dualquant.structured.OrderedGrid1D`

    values : list of float
        the objective :math:`\mathbb{E}[F_p^p]` after the dynamic program and after polishing
    """
    if dist.dim != 1 or not dist.is_bounded:
        raise ValueError(f"exhaustive search needs a bounded law of the real line, got {dist}")
    if n < 2:
        raise ValueError(f"exhaustive search needs n >= 2, got {n}")
    lo, hi = (x.item() for x in dist.bounding_box())
    if not hi > lo:
        raise ValueError(f"the support of {dist} is a single point")

    pieces = _uniform_pieces(dist)
    xs = None
    if pieces is None:
        xs = sample(dist, rng, samples)[:, 0].sort().values
        mesh = min(mesh, _SAMPLED_MESH)
    if n > mesh:
        raise ValueError(f"mesh of {mesh} points is too coarse for {n} knots")

    grid = torch.linspace(lo, hi, mesh, dtype=torch.float64)
    path, dp_value = _dynamic_program(_cost_matrix(grid, pieces, xs, p), n)
    knots = grid[path]
    logger.debug("dynamic program over %d mesh points: %.6g", mesh, dp_value)
    if n == 2 or pieces is None:
        return OrderedGrid1D(knots), [dp_value, dp_value]

    ends = torch.tensor([lo, hi], dtype=torch.float64)

    def objective(z):
        t = torch.tensor(z, dtype=torch.float64, requires_grad=True)
        full = torch.cat([ends[:1], t.sort().values, ends[1:]])
        value = _total_cost(full, pieces, xs, p)
        value.backward()
        return value.item(), t.grad.numpy().copy()

    res = scipy.optimize.minimize(
        objective,
        knots[1:-1].numpy(),
        jac=True,
        method="L-BFGS-B",
        bounds=[(lo, hi)] * (n - 2),
        options=dict(ftol=1e-15, gtol=1e-12, maxiter=500),
    )
    polished = torch.cat([ends[:1], torch.from_numpy(np.sort(res.x)), ends[1:]])
    polished_value = float(res.fun)
    logger.debug("L-BFGS-B polish: %.6g after %d iterations", polished_value, res.nit)
    if polished_value < dp_value and bool((polished[1:] > polished[:-1]).all()):
        return OrderedGrid1D(polished), [dp_value, polished_value]
    return OrderedGrid1D(knots), [dp_value, dp_value]
