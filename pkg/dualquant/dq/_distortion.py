import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import torch

import dualquant
from dualquant.core import SHARD_SIZE, DistributionSpec, Grid, NormSpec, RngStream, sample
from dualquant.lp import NumericalFailure
from dualquant.structured import OrderedGrid1D, ProductGrid
from dualquant.util import RunningMoments

from ._local import OutsideHull, _check_p, local_error, local_error_extended

logger = logging.getLogger(__name__)

FUNCTIONALS = ("dual", "extended", "nearest")

AnyGrid = Union[Grid, ProductGrid, OrderedGrid1D]


def grid_dim(grid: AnyGrid) -> int:
    return 1 if isinstance(grid, OrderedGrid1D) else grid.dim


def _nearest_cost(points: torch.Tensor, grid: AnyGrid, p: float, norm: NormSpec) -> torch.Tensor:
    if isinstance(grid, OrderedGrid1D):
        grid = ProductGrid([grid])
    if isinstance(grid, ProductGrid):
        if grid.dim == 1 or norm.r == p:
            return grid.nearest_cost(points, p)
        grid = grid.materialize()
    dist = torch.cdist(points, grid.points, p=norm.r, compute_mode="donot_use_mm_for_euclid_dist")
    return dist.min(dim=1).values.pow(p)


def _dual_cost(points: torch.Tensor, grid: AnyGrid, p: float, norm: NormSpec, extended: bool) -> torch.Tensor:
    if isinstance(grid, Grid) and grid.dim == 1:
        grid = OrderedGrid1D(grid.points[:, 0].sort().values)
    if isinstance(grid, OrderedGrid1D):
        grid = ProductGrid([grid])

    if isinstance(grid, ProductGrid) and (grid.dim == 1 or norm.r == p):
        inside = ((points >= grid.lower()) & (points <= grid.upper())).all(dim=1)
        if not extended and not inside.all():
            bad = points[~inside][0].tolist()
            raise OutsideHull(f"sample {bad} is outside the convex hull of the grid")
        values = torch.empty(len(points), dtype=torch.float64)
        if inside.any():
            values[inside] = grid.local_error(points[inside], p)
        if not inside.all():
            values[~inside] = grid.nearest_cost(points[~inside], p)
        return values

    if isinstance(grid, ProductGrid):
        grid = grid.materialize()
    f = local_error_extended if extended else local_error
    return torch.tensor([f(x, grid, p, norm).value_p for x in points], dtype=torch.float64)


def evaluate_costs(points: torch.Tensor, grid: AnyGrid, p: float, norm="l2", functional: str = "dual") -> torch.Tensor:
    r"""Per-sample cost of a quantization functional

    - ``"dual"``: :math:`F_p^p(\xi; \Gamma)`, every sample must lie in the hull
    - ``"extended"``: :math:`\bar F_p^p(\xi; \Gamma)`
    - ``"nearest"``: :math:`\min_i \|\xi - x_i\|^p`

    Product grids under the :math:`\ell^p` norm and grids of the real line use the closed forms,
    other grids solve one barycentric program per sample.
    A dual cost below the nearest neighbour cost of the same sample by more than the ``feasibility`` tolerance
    raises `dualquant.lp.NumericalFailure`, smaller gaps are rounded up to the nearest neighbour cost.

    Parameters
    ----------
    points : `torch.Tensor`
        samples of shape :math:`(N, d)`

    grid : `dualquant.core.Grid` or `dualquant.structured.ProductGrid` or `dualquant.structured.OrderedGrid1D`

    p : float

    norm : `dualquant.core.NormSpec`

    functional : str

    Returns
    -------
    `torch.Tensor`
        tensor of shape :math:`(N)`
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {FUNCTIONALS}, got {functional!r}")
    p = _check_p(p)
    norm = NormSpec(norm)
    points = torch.as_tensor(points, dtype=torch.float64)
    if points.dim() == 1:
        points = points[:, None]
    if points.shape[1] != grid_dim(grid):
        raise ValueError(f"samples of dimension {points.shape[1]} for a grid of dimension {grid_dim(grid)}")

    nearest = _nearest_cost(points, grid, p, norm)
    if functional == "nearest":
        return nearest
    dual = _dual_cost(points, grid, p, norm, functional == "extended")
    gap = nearest - dual
    tol = dualquant.get_tolerance_defaults()["feasibility"] * (1.0 + nearest)
    if (gap > tol).any():
        i = (gap - tol).argmax().item()
        raise NumericalFailure(
            f"{functional} cost {dual[i].item()!r} of sample {points[i].tolist()} is below its nearest neighbour cost "
            f"{nearest[i].item()!r}"
        )
    # rounding differences only
    return torch.where(gap > 0, nearest, dual)


@dataclass(frozen=True)
class DistortionReport:
    r"""Monte Carlo estimate of :math:`\mathbb{E}[F_p^p(X; \Gamma)]`, :math:`\mathbb{E}[\bar F_p^p(X; \Gamma)]`
    or :math:`\mathbb{E}[\min_i \|X - x_i\|^p]`

    Attributes
    ----------
    estimate_p : float
        the sample mean of the costs

    std_error : float
        sample standard deviation divided by :math:`\sqrt{\mathrm{samples}}`

    samples : int

    seed : int

    extended : bool

    p : float

    norm : `dualquant.core.NormSpec`

    functional : str
        ``"dual"``, ``"extended"`` or ``"nearest"``
    """

    estimate_p: float
    std_error: float
    samples: int
    seed: int
    extended: bool
    p: float
    norm: NormSpec
    functional: str = "dual"

    @property
    def estimate(self) -> float:
        r"""The distortion :math:`(\mathrm{estimate\_p})^{1/p}`"""
        return max(self.estimate_p, 0.0) ** (1.0 / self.p)

    @property
    def estimate_std_error(self) -> float:
        r"""Standard error of `estimate` by the delta method"""
        if self.estimate_p <= 0:
            return 0.0
        return self.std_error * self.estimate_p ** (1.0 / self.p - 1.0) / self.p


def estimate_functionals(
    dist: DistributionSpec,
    grid: AnyGrid,
    p: float,
    norm,
    samples: int,
    rng: RngStream,
    functionals: Sequence[str] = ("dual",),
) -> Dict[str, DistortionReport]:
    r"""Paired Monte Carlo estimates of several functionals on the same draws

    The samples are those of `dualquant.core.sample` and are evaluated in shards of ``SHARD_SIZE``.

    Returns
    -------
    dict
        a `DistortionReport` per functional
    """
    p = _check_p(p)
    norm = NormSpec(norm)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if dist.dim != grid_dim(grid):
        raise ValueError(f"distribution of dimension {dist.dim} for a grid of dimension {grid_dim(grid)}")

    acc = {f: RunningMoments() for f in functionals}
    for points in sample(dist, rng, samples).split(SHARD_SIZE):
        for f in functionals:
            acc[f].update(evaluate_costs(points, grid, p, norm, f))

    reports = {
        f: DistortionReport(
            estimate_p=max(a.mean, 0.0),
            std_error=a.std_error,
            samples=a.count,
            seed=rng.seed,
            extended=f == "extended",
            p=p,
            norm=norm,
            functional=f,
        )
        for f, a in acc.items()
    }
    logger.debug("estimated %s on %d samples", ", ".join(f"{f}={r.estimate_p:.6g}" for f, r in reports.items()), samples)
    return reports


def estimate_distortion(
    dist: DistributionSpec,
    grid: AnyGrid,
    p: float,
    norm,
    samples: int,
    rng: RngStream,
    extended: bool = False,
) -> DistortionReport:
    r"""Monte Carlo estimate of the dual distortion :math:`d_p^p(X; \Gamma)` or :math:`\bar d_p^p(X; \Gamma)`

    Parameters
    ----------
    dist : `dualquant.core.DistributionSpec`

    grid : `dualquant.core.Grid` or `dualquant.structured.ProductGrid` or `dualquant.structured.OrderedGrid1D`

    p : float

    norm : `dualquant.core.NormSpec`

    samples : int

    rng : `dualquant.core.RngStream`
        the estimate is a deterministic function of the seed

    extended : bool
        estimate :math:`\mathbb{E}[\bar F_p^p]` instead of :math:`\mathbb{E}[F_p^p]`

    Returns
    -------
    `DistortionReport`

    Raises
    ------
    `OutsideHull`
        if ``extended`` is ``False`` and a sample escapes the hull of the grid
    """
    functional = "extended" if extended else "dual"
    return estimate_functionals(dist, grid, p, norm, samples, rng, (functional,))[functional]
