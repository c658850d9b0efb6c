import pytest
import torch

import dualquant.dq._distortion
from dualquant.core import Empirical, Gaussian, Grid, RngStream, UniformCube, sample
from dualquant.dq import (
    OutsideHull,
    estimate_distortion,
    estimate_functionals,
    evaluate_costs,
    local_error,
    nearest_neighbor_project,
)
from dualquant.lp import NumericalFailure
from dualquant.structured import lattice_grid, uniform_knots
from dualquant.util.test import NORMS, random_grid, random_site_in_hull


def test_uniform_1d() -> None:
    report = estimate_distortion(UniformCube([0.0]), uniform_knots(11), 2, "l2", 10**6, RngStream(0))
    assert report.samples == 10**6
    assert abs(report.estimate_p - 1 / 600) <= 3 * report.std_error
    assert report.estimate == pytest.approx(report.estimate_p**0.5)


def test_plain_grid_1d() -> None:
    # an unsorted plain grid of the line takes the same closed form
    grid = Grid(torch.tensor([1.0, 0.0, 0.5, 0.25, 0.75], dtype=torch.float64)[:, None])
    a = estimate_distortion(UniformCube([0.0]), grid, 2, "l2", 5000, RngStream(3))
    b = estimate_distortion(UniformCube([0.0]), uniform_knots(5), 2, "l2", 5000, RngStream(3))
    assert a.estimate_p == pytest.approx(b.estimate_p, abs=1e-15)


def test_point_mass() -> None:
    report = estimate_distortion(Empirical([[0.3]]), Grid([0.3]), 2, "l2", 100, RngStream(0))
    assert report.estimate_p == 0.0
    assert report.std_error == 0.0


def test_deterministic() -> None:
    grid = lattice_grid([0.0, 0.0], 1.0, 3)
    a = estimate_distortion(UniformCube([0.0, 0.0]), grid, 2, "l2", 2000, RngStream(5))
    b = estimate_distortion(UniformCube([0.0, 0.0]), grid, 2, "l2", 2000, RngStream(5))
    assert (a.estimate_p, a.std_error, a.samples) == (b.estimate_p, b.std_error, b.samples)


def test_paired_ordering() -> None:
    grid = Grid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.4, 0.6]])
    functionals = ("dual", "extended", "nearest")
    reports = estimate_functionals(UniformCube([0.0, 0.0]), grid, 2, "l2", 500, RngStream(1), functionals)
    assert reports["nearest"].estimate_p <= reports["extended"].estimate_p <= reports["dual"].estimate_p
    assert reports["extended"].extended and not reports["dual"].extended

    points = sample(UniformCube([0.0, 0.0]), RngStream(1), 500)
    costs = {f: evaluate_costs(points, grid, 2, "l2", f) for f in functionals}
    assert (costs["nearest"] <= costs["extended"]).all()
    assert (costs["extended"] <= costs["dual"]).all()


def test_nearest_dominated(generator) -> None:
    grid = Grid(torch.rand(12, 2, generator=generator, dtype=torch.float64))
    points = torch.randn(300, 2, generator=generator, dtype=torch.float64)
    nearest = evaluate_costs(points, grid, 2, "l1", "nearest")
    extended = evaluate_costs(points, grid, 2, "l1", "extended")
    assert (nearest <= extended).all()


@pytest.mark.parametrize("norm", NORMS)
def test_raw_dual_above_nearest(generator, norm) -> None:
    # the barycentric program on its own, without any rounding up
    for _ in range(200):
        grid = random_grid(int(torch.randint(3, 12, (1,), generator=generator)), 2, generator)
        site = random_site_in_hull(grid, generator)
        p = float(torch.randint(1, 5, (1,), generator=generator))
        _, dist = nearest_neighbor_project(site, grid, norm)
        assert local_error(site, grid, p, norm).value_p >= dist**p - 1e-12


def test_dual_below_nearest(monkeypatch) -> None:
    grid = Grid([0.0, 1.0])
    points = torch.tensor([[0.25], [0.5]], dtype=torch.float64)
    nearest = evaluate_costs(points, grid, 2, "l2", "nearest")

    monkeypatch.setattr(dualquant.dq._distortion, "_dual_cost", lambda *args: nearest - 1e-13)
    assert torch.equal(evaluate_costs(points, grid, 2, "l2", "dual"), nearest)

    monkeypatch.setattr(dualquant.dq._distortion, "_dual_cost", lambda *args: torch.zeros(2, dtype=torch.float64))
    with pytest.raises(NumericalFailure):
        evaluate_costs(points, grid, 2, "l2", "dual")
    with pytest.raises(NumericalFailure):
        estimate_distortion(UniformCube([0.0]), grid, 2, "l2", 100, RngStream(0))


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_product_closed_form(generator, p) -> None:
    grid = lattice_grid([0.0, 0.0], 1.0, 4)
    points = torch.rand(50, 2, generator=generator, dtype=torch.float64)
    closed = evaluate_costs(points, grid, p, p, "dual")
    lp = evaluate_costs(points, grid.materialize(), p, p, "dual")
    assert (closed - lp).abs().max() < 1e-9


def test_outside_hull() -> None:
    grid = lattice_grid([0.0, 0.0], 1.0, 3)
    with pytest.raises(OutsideHull):
        estimate_distortion(Gaussian(2), grid, 2, "l2", 100, RngStream(0))
    report = estimate_distortion(Gaussian(2), grid, 2, "l2", 100, RngStream(0), extended=True)
    assert report.estimate_p > 0


def test_invalid() -> None:
    grid = uniform_knots(3)
    with pytest.raises(ValueError):
        estimate_distortion(UniformCube([0.0]), grid, 2, "l2", 0, RngStream(0))
    with pytest.raises(ValueError):
        estimate_distortion(UniformCube([0.0, 0.0]), grid, 2, "l2", 10, RngStream(0))
    with pytest.raises(ValueError):
        evaluate_costs(sample(UniformCube([0.0]), RngStream(0), 3), grid, 2, "l2", "voronoi")
