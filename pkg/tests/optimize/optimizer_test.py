import math
from dataclasses import replace

import pytest
import torch

from dualquant.core import Empirical, Gaussian, Grid, RngStream, UniformCube
from dualquant.dq import estimate_distortion
from dualquant.optimize import (
    Diverged,
    OptimizerConfig,
    TooFewPoints,
    optimize_grid,
    regular_quantization_distortion,
)
from dualquant.structured import lattice_grid, midpoint_knots


def test_config() -> None:
    c = OptimizerConfig(step_schedule=(2.0, 10.0))
    assert c.step(0) == 0.2
    assert c.effective_batch_size == 1
    assert OptimizerConfig(method="lloyd_like").effective_batch_size == 64
    assert OptimizerConfig(method="lloyd_like", batch_size=8).effective_batch_size == 8
    bad_settings = [
        dict(method="newton"),
        dict(iterations=0),
        dict(step_schedule=(0.0, 1.0)),
        dict(averaging=2.0),
        dict(workers=0),
    ]
    for bad in bad_settings:
        with pytest.raises(ValueError):
            OptimizerConfig(**bad)


def test_exhaustive() -> None:
    config = OptimizerConfig(method="exhaustive_1d", final_samples=10**6)
    result = optimize_grid(UniformCube([0.0]), 5, 2, config=config)
    assert len(result.grid) == 5
    assert result.final_report.estimate == pytest.approx((2 / 12) ** 0.5 / 4, rel=0.01)
    assert result.config is config


def test_point_mass() -> None:
    result = optimize_grid(Empirical([[0.3, 0.4]]), 1, 2)
    assert result.grid.points.tolist() == [[0.3, 0.4]]
    assert result.final_report.estimate_p == 0.0

    # fewer atoms than points
    result = optimize_grid(Empirical([0.0, 1.0, 1.0]), 4, 2)
    assert len(result.grid) == 2


def test_sgd_lattice() -> None:
    config = OptimizerConfig(iterations=200, checkpoints=4, samples_per_eval=1024, final_samples=4096, seed=3)
    dist = UniformCube([0.0, 0.0])
    result = optimize_grid(dist, 9, 2, config=config)
    assert len(result.grid) <= 9

    # paired with the final report
    lattice = estimate_distortion(dist, lattice_grid([0.0, 0.0], 1.0, 2), 2, "l2", 4096, RngStream(3).substream(2**21))
    pooled = math.sqrt(result.final_report.std_error**2 + lattice.std_error**2)
    assert result.final_report.estimate_p <= lattice.estimate_p + 2 * pooled


def test_trajectory() -> None:
    config = OptimizerConfig(iterations=40, checkpoints=4, restarts=2, samples_per_eval=256, averaging=0.0)
    result = optimize_grid(UniformCube([0.0, 0.0]), 6, 2, config=config)
    restarts = {r for r, _, _, _ in result.trajectory}
    assert restarts == {0, 1}
    best = [b for _, _, _, b in result.trajectory]
    assert all(b1 >= b2 for b1, b2 in zip(best[:-1], best[1:]))
    assert best[-1] == min(v for _, _, v, _ in result.trajectory)
    assert len(result.grid) <= 6
    assert result.final_report.samples == 256


def test_lloyd_like_extended() -> None:
    config = OptimizerConfig(
        method="lloyd_like", iterations=30, checkpoints=3, samples_per_eval=512, extended=True, batch_size=8
    )
    result = optimize_grid(Gaussian(1), 5, 2, config=config)
    assert len(result.grid) <= 5
    assert result.final_report.extended
    assert math.isfinite(result.final_report.estimate_p)


def test_deterministic() -> None:
    config = OptimizerConfig(iterations=20, checkpoints=2, samples_per_eval=128, seed=11)
    a = optimize_grid(UniformCube([0.0]), 4, 2, config=config)
    b = optimize_grid(UniformCube([0.0]), 4, 2, config=config)
    assert torch.equal(a.grid.points, b.grid.points)
    assert a.trajectory == b.trajectory


@pytest.mark.parametrize("workers", [2, 4])
def test_concurrent_restarts(workers) -> None:
    config = OptimizerConfig(iterations=20, checkpoints=4, restarts=3, samples_per_eval=256, seed=5)
    serial = optimize_grid(UniformCube([0.0, 0.0]), 5, 2, config=config)
    threaded = optimize_grid(UniformCube([0.0, 0.0]), 5, 2, config=replace(config, workers=workers))
    assert torch.equal(serial.grid.points, threaded.grid.points)
    assert serial.trajectory == threaded.trajectory
    assert serial.final_report.estimate_p == threaded.final_report.estimate_p

def test_errors() -> None:
    with pytest.raises(TooFewPoints):
        optimize_grid(UniformCube([0.0, 0.0]), 2, 2)
    with pytest.raises(ValueError):
        optimize_grid(Gaussian(1), 4, 2)
    with pytest.raises(ValueError):
        optimize_grid(UniformCube([0.0]), 4, 2, config=OptimizerConfig(method="exhaustive_1d", extended=True))
    with pytest.raises(ValueError):
        optimize_grid(UniformCube([0.0]), 4, 0.5)


def test_diverged() -> None:
    config = OptimizerConfig(iterations=10, checkpoints=10, samples_per_eval=256, extended=True, step_schedule=(1e8, 1.0))
    with pytest.raises(Diverged):
        optimize_grid(Gaussian(1), 3, 2, config=config)
    with pytest.raises(Diverged):
        optimize_grid(Gaussian(1), 3, 2, config=replace(config, restarts=2, workers=2))


def test_regular() -> None:
    dist = UniformCube([0.0])
    report = regular_quantization_distortion(dist, midpoint_knots(2), 2, samples=10**5, rng=RngStream(0))
    assert report.functional == "nearest"
    assert abs(report.estimate_p - 1 / 48) <= 3 * report.std_error

    grid = Grid([0.1, 0.5, 0.8])
    regular = regular_quantization_distortion(Gaussian(1), grid, 2, samples=1000, rng=RngStream(1))
    extended = estimate_distortion(Gaussian(1), grid, 2, "l2", 1000, RngStream(1), extended=True)
    assert regular.estimate_p <= extended.estimate_p

    point = regular_quantization_distortion(Empirical([[0.3]]), Grid([0.3]), 2, samples=10)
    assert point.estimate_p == 0.0
