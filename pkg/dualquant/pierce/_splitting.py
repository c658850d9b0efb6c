r"""Splitting functionals on the real line

A splitting functional at level :math:`n` maps non-decreasing knots :math:`x_1 \leq \dots \leq x_n` and a site
:math:`\xi` to a knot of the bracketing interval :math:`[x_i, x_{i+1}]` when :math:`x_1 < \xi < x_n`,
to :math:`x_1` when :math:`\xi \leq x_1` and to :math:`x_n` when :math:`\xi \geq x_n`.
Its error is dominated by the envelope

.. math::

    A_{p,n}(x, \xi)^p = \sum_i (x_{i+1} - x_i)^p 1_{[x_i, x_{i+1})}(\xi) + (x_1 - \xi)^p 1_{\xi < x_1}
    + (\xi - x_n)^p 1_{\xi \geq x_n}
"""
from typing import Tuple, Union

import torch

from dualquant.core import RngStream
from dualquant.structured import OrderedGrid1D

KINDS = ("voronoi", "dual")
ERROR_FUNCTIONALS = ("envelope", "dual", "voronoi")


def _as_knots(knots) -> torch.Tensor:
    if isinstance(knots, OrderedGrid1D):
        return knots.knots
    knots = torch.as_tensor(knots, dtype=torch.float64).reshape(-1)
    if knots.numel() < 1:
        raise ValueError("at least one knot is needed")
    if (knots[1:] < knots[:-1]).any():
        raise ValueError(f"knots must be non-decreasing, got {knots.tolist()}")
    return knots


def _bracket(knots: torch.Tensor, sites: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    # i is the last knot <= site, so knots[i] <= site < knots[i + 1] inside
    i = torch.searchsorted(knots, sites, right=True) - 1
    below = i < 0
    above = i >= len(knots) - 1
    return i.clamp(0, max(len(knots) - 2, 0)), below, above


def _split_batch(kind: str, knots: torch.Tensor, sites: torch.Tensor, u: torch.Tensor) -> torch.Tensor:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if len(knots) == 1:
        return knots[0].expand_as(sites).clone()
    i, below, above = _bracket(knots, sites)
    left, right = knots[i], knots[i + 1]
    if kind == "voronoi":
        # midpoint ties go to the left knot
        out = torch.where(sites - left <= right - sites, left, right)
    else:
        out = torch.where(u < (right - sites) / (right - left), left, right)
    out = torch.where(below, knots[0], out)
    return torch.where(above, knots[-1], out)


def apply_splitting(kind: str, knots, site: Union[float, torch.Tensor], rng: RngStream) -> Union[float, torch.Tensor]:
    r"""Apply a splitting functional

    - ``"voronoi"``: the nearest knot, the left one at midpoints
    - ``"dual"``: :math:`x_i` with probability :math:`\frac{x_{i+1} - \xi}{x_{i+1} - x_i}`, else :math:`x_{i+1}`

    Parameters
    ----------
    kind : {"voronoi", "dual"}

    knots : `dualquant.structured.OrderedGrid1D` or sequence of float
        non-decreasing knots

    site : float or `torch.Tensor`
        a site, or a tensor of sites each split with its own uniform variable

    rng : `dualquant.core.RngStream`

    Returns
    -------
    float or `torch.Tensor`
        knots, with the shape of ``site``

    Examples
    --------
    >>> apply_splitting("voronoi", [0.0, 1.0], 0.5, RngStream(0))
    0.0
    >>> apply_splitting("dual", [0.0, 1.0], -3.0, RngStream(0))
    0.0
    """
    knots = _as_knots(knots)
    scalar = not torch.is_tensor(site)
    sites = torch.as_tensor(site, dtype=torch.float64).reshape(-1)
    u = torch.rand(sites.shape, generator=rng.generator(), dtype=torch.float64)
    out = _split_batch(kind, knots, sites, u)
    if scalar:
        return out.item()
    return out.reshape(torch.as_tensor(site).shape)


def a_pn(knots, site: Union[float, torch.Tensor], p: float = 1.0) -> Union[float, torch.Tensor]:
    r"""The envelope :math:`A_{p,n}` in its root form

    Returns :math:`x_{i+1} - x_i` on the bracketing interval :math:`[x_i, x_{i+1})`, :math:`\xi - x_n` for
    :math:`\xi \geq x_n` and :math:`x_1 - \xi` below :math:`x_1`.
    Repeating a knot does not change the envelope.

    Parameters
    ----------
    knots : `dualquant.structured.OrderedGrid1D` or sequence of float
        non-decreasing knots

    site : float or `torch.Tensor`

    p : float
        exponent :math:`p \geq 1`, the root form does not depend on it

    Examples
    --------
    >>> a_pn([0.0, 1.0], 0.5, 2)
    1.0
    >>> a_pn([0.0, 1.0], 2.0, 2)
    1.0
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    knots = _as_knots(knots)
    scalar = not torch.is_tensor(site)
    sites = torch.as_tensor(site, dtype=torch.float64).reshape(-1)
    out = _envelope(knots, sites)
    if scalar:
        return out.item()
    return out.reshape(torch.as_tensor(site).shape)


def _envelope(knots: torch.Tensor, sites: torch.Tensor) -> torch.Tensor:
    i, below, above = _bracket(knots, sites)
    if len(knots) > 1:
        out = knots[i + 1] - knots[i]
    else:
        out = torch.zeros_like(sites)
    out = torch.where(below, knots[0] - sites, out)
    return torch.where(above, sites - knots[-1], out)


def splitting_error(functional: str, knots, sites: torch.Tensor, p: float) -> torch.Tensor:
    r"""Per-site error :math:`p`-th power of a splitting functional

    - ``"envelope"``: :math:`A_{p,n}(x, \xi)^p`
    - ``"dual"``: :math:`\mathbb{E}_\omega |\xi - \Phi_n(\omega, x, \xi)|^p` for the dual functional
    - ``"voronoi"``: :math:`\min_i |\xi - x_i|^p`

    Parameters
    ----------
    functional : {"envelope", "dual", "voronoi"}

    knots : `dualquant.structured.OrderedGrid1D` or sequence of float

    sites : `torch.Tensor`
        tensor of shape :math:`(N)`

    p : float

    Returns
    -------
    `torch.Tensor`
        tensor of shape :math:`(N)`
    """
    if functional not in ERROR_FUNCTIONALS:
        raise ValueError(f"functional must be one of {ERROR_FUNCTIONALS}, got {functional!r}")
    knots = _as_knots(knots)
    sites = torch.as_tensor(sites, dtype=torch.float64)

    if functional == "envelope":
        return _envelope(knots, sites).pow(p)
    if functional == "voronoi" or len(knots) == 1:
        return (sites[:, None] - knots).abs().min(dim=1).values.pow(p)

    i, below, above = _bracket(knots, sites)
    left = (sites - knots[i]).clamp(min=0.0)
    right = (knots[i + 1] - sites).clamp(min=0.0)
    gap = torch.where(right + left > 0, right + left, torch.ones_like(left))
    out = (right * left.pow(p) + left * right.pow(p)) / gap
    out = torch.where(below, (knots[0] - sites).pow(p), out)
    return torch.where(above, (sites - knots[-1]).pow(p), out)
