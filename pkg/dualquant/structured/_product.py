from typing import Optional, Sequence, Union

import torch

from dualquant.core import Grid, NormSpec, UniformCubeUnion, as_point
from dualquant.util import integer_root, prod

from ._interval import OrderedGrid1D, local_error_1d, uniform_knots


class NormMismatch(ValueError):
    r"""The product decomposition needs the :math:`\ell^p` norm"""


class ProductGrid:
    r"""Product :math:`\Gamma = \prod_{j=1}^d \Gamma_j` of grids of the real line

    Only the axes are stored; `materialize` builds the :math:`\prod_j n_j` points.

    Parameters
    ----------
    axes : list of `OrderedGrid1D`

    Examples
    --------
    >>> g = ProductGrid([OrderedGrid1D([0.0, 1.0]), OrderedGrid1D([0.0, 0.5, 1.0])])
    >>> g.size
    6
    >>> g.materialize()
    Grid(n=6, d=2)
    """

    def __init__(self, axes: Sequence[Union[OrderedGrid1D, Sequence[float]]]) -> None:
        axes = [a if isinstance(a, OrderedGrid1D) else OrderedGrid1D(a) for a in axes]
        if len(axes) < 1:
            raise ValueError("a product grid needs at least one axis")
        self.axes = axes

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def size(self) -> int:
        return prod(a.size for a in self.axes)

    @property
    def shape(self):
        return tuple(a.size for a in self.axes)

    def lower(self) -> torch.Tensor:
        return torch.tensor([a.lower for a in self.axes], dtype=torch.float64)

    def upper(self) -> torch.Tensor:
        return torch.tensor([a.upper for a in self.axes], dtype=torch.float64)

    def materialize(self) -> Grid:
        if self.dim == 1:
            return self.axes[0].to_grid()
        return Grid(torch.cartesian_prod(*[a.knots for a in self.axes]))

    def local_error(self, sites: torch.Tensor, p: float) -> torch.Tensor:
        r"""Vectorized :math:`\sum_j F^p(\xi^j; \Gamma_j)` over sites of shape :math:`(N, d)`"""
        return sum(local_error_1d(sites[:, j].contiguous(), axis, p) for j, axis in enumerate(self.axes))

    def nearest_cost(self, sites: torch.Tensor, p: float) -> torch.Tensor:
        r"""Vectorized :math:`\sum_j \mathrm{dist}(\xi^j, \Gamma_j)^p`, the nearest neighbour cost under :math:`\ell^p`"""
        total = torch.zeros(len(sites), dtype=torch.float64)
        for j, axis in enumerate(self.axes):
            total = total + (sites[:, j, None] - axis.knots).abs().min(dim=1).values.pow(p)
        return total

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(shape={self.shape})"


def lattice_grid(corner, edge: float, m: int) -> ProductGrid:
    r"""Regular lattice with :math:`m + 1` knots per axis on the cube :math:`a + \ell [0, 1]^d`

    Parameters
    ----------
    corner : sequence of float
        the corner :math:`a`, its length is the dimension

    edge : float
        the edge length :math:`\ell > 0`

    m : int
        number of subdivisions per axis, :math:`m \geq 1`

    Returns
    -------
    `ProductGrid`
        axis :math:`j` has knots :math:`a_j + i \ell / m`, :math:`i = 0, \dots, m`

    Examples
    --------
    >>> lattice_grid([0.0], 1.0, 2).axes[0].knots
    tensor([0.0000, 0.5000, 1.0000], dtype=torch.float64)
    """
    corner = as_point(corner)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not edge > 0:
        raise ValueError(f"edge length must be positive, got {edge}")
    return ProductGrid([uniform_knots(m + 1, a, a + edge) for a in corner.tolist()])


def product_local_error(site, grid: ProductGrid, p: float, norm: Optional[NormSpec] = None) -> float:
    r"""Local dual quantization error of a product grid under the :math:`\ell^p` norm

    .. math::

        F^p(\xi; \Gamma) = \sum_{j=1}^d F^p(\xi^j; \Gamma_j)

    Parameters
    ----------
    site : sequence of float
        the point :math:`\xi`, inside the box spanned by the axes

    grid : `ProductGrid`

    p : float
        exponent :math:`p \geq 1`

    norm : `dualquant.core.NormSpec`, optional
        norm in force, defaults to :math:`\ell^p`

    Returns
    -------
    float
        the :math:`p`-th power :math:`F^p`
    """
    if norm is not None and NormSpec(norm).r != p:
        raise NormMismatch(f"the product decomposition holds under l{p:g}, got {NormSpec(norm)!r}")
    site = as_point(site, dim=grid.dim)
    return sum(local_error_1d(x, axis, p) for x, axis in zip(site.tolist(), grid.axes))


def cubewise_grid(dist: UniformCubeUnion, n: int, p: float) -> Grid:
    r"""Grid of size at most ``n`` made of one lattice per cube of a union of cubes

    Cube :math:`i` receives :math:`n_i = \lfloor t_i n \rfloor` points with

    .. math::

        t_i = \frac{s_i^{d/(d+p)}}{\sum_j s_j^{d/(d+p)}}

    and carries the lattice with :math:`\lfloor n_i^{1/d} \rfloor` knots per axis.

    Parameters
    ----------
    dist : `dualquant.core.UniformCubeUnion`

    n : int
        budget of points

    p : float
        exponent :math:`p \geq 1`

    Returns
    -------
    `dualquant.core.Grid`
    """
    d = dist.dim
    t = dist.weights.pow(d / (d + p))
    t = t / t.sum()
    points = []
    for i, share in enumerate(t.tolist()):
        n_i = int(share * n)
        k = integer_root(n_i, d)
        if k < 2:
            raise ValueError(f"n={n} is too small: cube {i} gets {n_i} points, fewer than 2^{d}")
        points.append(lattice_grid(dist.corners[i], dist.edge, k - 1).materialize().points)
    return Grid.from_points(torch.cat(points), dedupe=True)

