import pytest
import torch

from dualquant.core import Grid, RngStream
from dualquant.dq import OutsideHull, local_error, split
from dualquant.util.test import binomial_band, random_grid, random_site_in_hull


def test_two_points() -> None:
    draws = split([0.25], Grid([0.0, 1.0]), 2, "l2", RngStream(0), count=10**5)
    assert draws.shape == (10**5, 1)
    freq = (draws[:, 0] == 0.0).double().mean().item()
    lo, hi = binomial_band(0.75, 10**5)
    assert lo <= freq <= hi


def test_grid_point(generator) -> None:
    grid = random_grid(5, 2, generator)
    draws = split(grid.points[3], grid, 2, "l2", RngStream(1), count=100)
    assert (draws == grid.points[3]).all()


def test_frequencies(generator) -> None:
    grid = random_grid(8, 2, generator)
    site = random_site_in_hull(grid, generator)
    cert = local_error(site, grid, 2).certificate
    draws = split(site, grid, 2, "l2", RngStream(2), count=10**5)
    for i, w in zip(cert.support, cert.weights.tolist()):
        freq = (draws == grid.points[i]).all(dim=1).double().mean().item()
        lo, hi = binomial_band(w, 10**5)
        assert lo <= freq <= hi
    # the empirical mean is the site up to Monte Carlo error
    assert (draws.mean(0) - site).abs().max() < 0.01


def test_single_draw() -> None:
    x = split([0.5], Grid([0.0, 1.0]), 2, "l2", RngStream(0))
    assert x.shape == (1,)
    assert x.item() in (0.0, 1.0)


def test_outside() -> None:
    grid = Grid([0.0, 1.0])
    with pytest.raises(OutsideHull):
        split([2.0], grid, 2, "l2", RngStream(0))
    draws = split([2.0], grid, 2, "l2", RngStream(0), count=10, extended=True)
    assert (draws == 1.0).all()
    with pytest.raises(ValueError):
        split([0.5], grid, 2, "l2", RngStream(0), count=0)


def test_reproducible() -> None:
    grid = Grid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    site = torch.tensor([0.2, 0.3], dtype=torch.float64)
    a = split(site, grid, 2, "l2", RngStream(9), count=50)
    b = split(site, grid, 2, "l2", RngStream(9), count=50)
    assert (a == b).all()
