import math
from typing import Union

import sympy
import torch

import dualquant
from dualquant.core import Grid


class OutsideRange(ValueError):
    r"""The site is outside :math:`[x_1, x_n]`"""


class SpanMismatch(ValueError):
    r"""The knots do not span :math:`[0, 1]`"""


class OrderedGrid1D:
    r"""Strictly increasing knots :math:`x_1 < \dots < x_n` on the real line

    Parameters
    ----------
    knots : sequence of float or `torch.Tensor`

    Examples
    --------
    >>> OrderedGrid1D([0.0, 0.5, 1.0])
    OrderedGrid1D(n=3, span=[0, 1])
    """

    def __init__(self, knots) -> None:
        knots = torch.as_tensor(knots, dtype=torch.float64).reshape(-1).clone()
        if knots.numel() < 1:
            raise ValueError("an ordered grid needs at least one knot")
        if not torch.isfinite(knots).all():
            raise ValueError("knots must be finite")
        if (knots[1:] <= knots[:-1]).any():
            raise ValueError(f"knots must be strictly increasing, got {knots.tolist()}")
        self._knots = knots

    @property
    def knots(self) -> torch.Tensor:
        return self._knots

    @property
    def size(self) -> int:
        return self._knots.numel()

    @property
    def lower(self) -> float:
        return self._knots[0].item()

    @property
    def upper(self) -> float:
        return self._knots[-1].item()

    def gaps(self) -> torch.Tensor:
        r"""Interval lengths :math:`\Delta_i = x_{i+1} - x_i`"""
        return self._knots[1:] - self._knots[:-1]

    def to_grid(self) -> Grid:
        return Grid(self._knots[:, None])

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n={self.size}, span=[{self.lower:g}, {self.upper:g}])"


def uniform_knots(n: int, a: float = 0.0, b: float = 1.0) -> OrderedGrid1D:
    r"""The ``n`` equally spaced knots :math:`a + (b - a) \frac{i}{n - 1}`, both ends included"""
    if n < 2:
        raise ValueError(f"need at least two knots, got n={n}")
    return OrderedGrid1D(torch.linspace(a, b, n, dtype=torch.float64))


def midpoint_knots(n: int, a: float = 0.0, b: float = 1.0) -> OrderedGrid1D:
    r"""The ``n`` midpoints :math:`a + (b - a) \frac{2 i - 1}{2 n}`

    Optimal for the nearest neighbour cost of the uniform law.
    """
    if n < 1:
        raise ValueError(f"need at least one knot, got n={n}")
    i = torch.arange(1, n + 1, dtype=torch.float64)
    return OrderedGrid1D(a + (b - a) * (2 * i - 1) / (2 * n))


def local_error_1d(site: Union[float, torch.Tensor], grid: OrderedGrid1D, p: float) -> Union[float, torch.Tensor]:
    r"""Local dual quantization error of a grid of the real line

    .. math::

        F^p(\xi) = \frac{(x_{i+1} - \xi)(\xi - x_i)^p + (\xi - x_i)(x_{i+1} - \xi)^p}{x_{i+1} - x_i}

    on the bracketing interval :math:`x_i \leq \xi \leq x_{i+1}`.

    Parameters
    ----------
    site : float or `torch.Tensor`
        a site or a tensor of sites of shape :math:`(N)`

    grid : `OrderedGrid1D`

    p : float
        exponent :math:`p \geq 1`

    Returns
    -------
    float or `torch.Tensor`
        the :math:`p`-th power :math:`F^p`, with the shape of ``site``

    Examples
    --------
    >>> local_error_1d(0.5, OrderedGrid1D([0.0, 1.0]), 2)
    0.25
    """
    scalar = not torch.is_tensor(site)
    xi = torch.as_tensor(site, dtype=torch.float64).reshape(-1)
    knots = grid.knots

    slack = dualquant.get_tolerance_defaults()["feasibility"] * (1.0 + xi.abs())
    outside = (xi < knots[0] - slack) | (xi > knots[-1] + slack)
    if outside.any():
        bad = xi[outside][0].item()
        raise OutsideRange(f"site {bad} is outside [{grid.lower}, {grid.upper}]")
    xi = xi.clamp(knots[0], knots[-1])

    if grid.size == 1:
        value = torch.zeros_like(xi)
    else:
        i = (torch.searchsorted(knots, xi, right=True) - 1).clamp(0, grid.size - 2)
        left = xi - knots[i]
        right = knots[i + 1] - xi
        value = (right * left.pow(p) + left * right.pow(p)) / (knots[i + 1] - knots[i])

    if scalar:
        return value.item()
    return value.reshape(torch.as_tensor(site).shape)


def _as_rational(x: float) -> sympy.Rational:
    return sympy.Rational(repr(float(x)))


def analytic_distortion_uniform_1d(grid: OrderedGrid1D, p: float, exact: bool = False):
    r"""Dual distortion :math:`\int_0^1 F^p(\xi) d\xi` of the uniform law on :math:`[0, 1]`

    .. math::

        \sum_i \frac{2 \Delta_i^{p+1}}{(p+1)(p+2)}

    Parameters
    ----------
    grid : `OrderedGrid1D`
        knots with :math:`x_1 = 0` and :math:`x_n = 1`

    p : float
        exponent :math:`p \geq 1`

    exact : bool
        if ``True``, return a `sympy.Rational`; the knots are read as their shortest decimal representation
        and ``p`` must be an integer

    Returns
    -------
    float or `sympy.Rational`
        the :math:`p`-th power :math:`d_p^p`

    Examples
    --------
    >>> analytic_distortion_uniform_1d(uniform_knots(3), 2, exact=True)
    1/24
    """
    if abs(grid.lower) > 1e-12 or abs(grid.upper - 1.0) > 1e-12 or grid.size < 2:
        raise SpanMismatch(f"knots must span [0, 1], got [{grid.lower}, {grid.upper}] with {grid.size} knots")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")

    if exact:
        if p != int(p):
            raise ValueError(f"exact evaluation needs an integer p, got {p}")
        p = int(p)
        knots = [_as_rational(x) for x in grid.knots.tolist()]
        knots[0], knots[-1] = sympy.Integer(0), sympy.Integer(1)
        total = sum((b - a) ** (p + 1) for a, b in zip(knots[:-1], knots[1:]))
        return sympy.Rational(2, (p + 1) * (p + 2)) * total

    gaps = grid.gaps()
    return (2.0 / ((p + 1) * (p + 2)) * gaps.pow(p + 1).sum()).item()


def dual_coefficient_1d(p: float) -> float:
    r"""Dual quantization coefficient of the uniform law on :math:`[0, 1]`

    .. math::

        \lim_n n \, d_{n,p} = \left( \frac{2}{(p+1)(p+2)} \right)^{1/p}
    """
    return (2.0 / ((p + 1) * (p + 2))) ** (1.0 / p)


def regular_coefficient_1d(p: float) -> float:
    r"""Regular (nearest neighbour) quantization coefficient of the uniform law on :math:`[0, 1]`

    .. math::

        \lim_n n \, e_{n,p} = \frac{1}{2 (p+1)^{1/p}}
    """
    return 1.0 / (2.0 * (p + 1) ** (1.0 / p))


def optimal_regular_distortion_uniform_1d(n: int, p: float) -> float:
    r""":math:`e_{n,p}^p = \frac{(2n)^{-p}}{p+1}`, attained by `midpoint_knots`"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (2.0 * n) ** (-p) / (p + 1)


def coefficient_ratio_1d(p: float) -> float:
    r"""Ratio of the dual and regular coefficients :math:`(2^{p+1} / (p+2))^{1/p}`"""
    return math.pow(2 ** (p + 1) / (p + 2), 1.0 / p)
