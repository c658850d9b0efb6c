import logging
import math
import random
from typing import Optional, Tuple

import numpy as np
import torch

from dualquant.core import Grid, NormSpec
from dualquant.dq import local_error, local_error_bruteforce

# Make a logger for reporting error statistics
logger = logging.getLogger(__name__)


NORMS = ("l1", "l2", "linf")


def set_random_seeds() -> None:
    """Set the random seeds to try to get some reproducibility"""
    torch.manual_seed(0)
    random.seed(0)
    np.random.seed(0)


def random_grid(n: int, d: int, generator: Optional[torch.Generator] = None, full_dimensional: bool = True) -> Grid:
    r"""Generate a random grid of :math:`n` points in :math:`[0, 1]^d`

    Parameters
    ----------
        n : int
            number of points
        d : int
            dimension
        generator : `torch.Generator`, optional
        full_dimensional : bool
            redraw until the points span :math:`\mathbb{R}^d`, requires :math:`n \geq d + 1`

    Returns
    -------
        `dualquant.core.Grid`
    """
    if full_dimensional and n < d + 1:
        raise ValueError(f"{n} points cannot span dimension {d}")
    while True:
        grid = Grid(torch.rand(n, d, generator=generator, dtype=torch.float64))
        if not full_dimensional or grid.is_full_dimensional():
            return grid


def random_site_in_hull(grid: Grid, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    r"""A random convex combination of the grid points, with Dirichlet(1, ..., 1) weights"""
    u = torch.rand(len(grid), generator=generator, dtype=torch.float64)
    w = -torch.log1p(-u)
    return (w / w.sum()) @ grid.points


def random_norm() -> NormSpec:
    r"""One of :math:`\ell^1`, :math:`\ell^2`, :math:`\ell^\infty`"""
    return NormSpec(random.choice(NORMS))


def assert_stationary(site, grid: Grid, p: float, norm="l2", tol: float = 1e-10) -> float:
    r"""Assert that the certificate of ``site`` is a probability vector whose barycenter is ``site``

    Returns
    -------
        float
            the largest coordinate error of the barycenter
    """
    cert = local_error(site, grid, p, norm).certificate
    site = torch.as_tensor(site, dtype=torch.float64).reshape(-1)
    error = (cert.barycenter(grid) - site).abs().max().item()
    logger.info("Tested stationarity at %s -- max coordinate error %.3g", site.tolist(), error)
    assert (cert.weights > 0).all(), f"non-positive weights {cert.weights.tolist()}"
    assert abs(cert.weights.sum().item() - 1.0) <= tol, f"weights sum to {cert.weights.sum().item()}"
    assert len(cert.support) <= grid.dim + 1, f"support {cert.support} has more than d + 1 points"
    assert error <= tol, f"barycenter is off by {error}"
    return error


def assert_oracle_agreement(site, grid: Grid, p: float, norm="l2", tol: float = 1e-8) -> float:
    r"""Assert that the simplex and the enumeration of affinely independent subsets agree

    Returns
    -------
        float
            the absolute difference of the two values
    """
    lp = local_error(site, grid, p, norm).value_p
    brute = local_error_bruteforce(site, grid, p, norm)
    error = abs(lp - brute)
    logger.info("Tested oracle agreement n=%d d=%d p=%g %r -- error %.3g", len(grid), grid.dim, p, NormSpec(norm), error)
    assert error <= tol * max(1.0, abs(brute)), f"simplex {lp} != enumeration {brute}"
    return error


def binomial_band(prob: float, count: int, sigmas: float = 4.0) -> Tuple[float, float]:
    r"""Band :math:`\pi \pm k \sqrt{\pi (1 - \pi) / N}` for an empirical frequency"""
    half = sigmas * math.sqrt(prob * (1.0 - prob) / count)
    return prob - half, prob + half
