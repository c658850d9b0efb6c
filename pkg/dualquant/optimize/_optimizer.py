import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import torch

from dualquant.core import DistributionSpec, Empirical, Grid, NormSpec, RngStream, UniformCube
from dualquant.dq import DistortionReport, estimate_distortion, estimate_functionals
from dualquant.structured import lattice_grid
from dualquant.util import integer_root

from ._config import OptimizationResult, OptimizerConfig
from ._exhaustive import exhaustive_1d
from ._gradient import envelope_gradient

logger = logging.getLogger(__name__)

_EVAL_STREAM = 2**20
_FINAL_STREAM = 2**21
_DIVERGENCE_FACTOR = 10.0
_REPAIR_ATTEMPTS = 1000


class TooFewPoints(ValueError):
    r"""Fewer than :math:`d + 1` points cannot cover a full-dimensional support"""


class Diverged(RuntimeError):
    r"""The objective blew up during the optimization"""


def _hull_anchors(dist: DistributionSpec, n: int) -> torch.Tensor:
    # vertices of the bounding box, or of a simplex containing it when n < 2^d
    lo, hi = dist.bounding_box()
    d = dist.dim
    if n >= 2**d:
        vertices = torch.cartesian_prod(*[torch.stack([lo[j], hi[j]]) for j in range(d)]).reshape(-1, d)
    else:
        vertices = torch.cat([lo[None], lo + d * torch.diag(hi - lo)])
    return Grid.from_points(vertices, dedupe=True).points


def _repair(points: torch.Tensor, pinned: torch.Tensor, dist: DistributionSpec, gen: torch.Generator) -> Grid:
    # redraw the free copy of coinciding points
    tol = 1e-9 * (1.0 + points.abs().max().item())
    for _ in range(_REPAIR_ATTEMPTS):
        close = torch.cdist(points, points, p=float("inf")) <= tol
        close = close.triu(diagonal=1) & ~pinned[None, :]
        clash = close.any(dim=0)
        if not clash.any():
            return Grid(points)
        points = points.clone()
        points[clash] = dist.draw(int(clash.sum()), gen)
    logger.warning("could not separate coinciding grid points, dropping duplicates")
    return Grid.from_points(points, dedupe=True)


def _initial_points(
    dist: DistributionSpec, n: int, anchors: torch.Tensor, restart: int, gen: torch.Generator
) -> Tuple[torch.Tensor, torch.Tensor]:
    if restart == 0 and isinstance(dist, UniformCube):
        m = integer_root(n, dist.dim)
        if m >= 2 and m**dist.dim == n:
            points = lattice_grid(dist.corner, dist.edge, m - 1).materialize().points
            lo, hi = dist.bounding_box()
            pinned = ((points == lo) | (points == hi)).all(dim=1) if len(anchors) > 0 else torch.zeros(n, dtype=torch.bool)
            return points, pinned
    free = dist.draw(n - len(anchors), gen)
    points = torch.cat([anchors, free])
    pinned = torch.arange(n) < len(anchors)
    return points, pinned


def _check_inputs(dist: DistributionSpec, n: int, p: float, config: OptimizerConfig) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if config.extended:
        return
    if not dist.is_bounded:
        raise ValueError(f"{dist} has unbounded support, its dual distortion is infinite: use the extended objective")
    if dist.support_affine_dim() == dist.dim and n < dist.dim + 1:
        raise TooFewPoints(f"{n} points cannot cover the support of {dist}, at least {dist.dim + 1} are needed")


class _Tracker:
    r"""Best grid across restarts and the checkpoint trajectory"""

    def __init__(self) -> None:
        self.grid = None
        self.value = float("inf")
        self.trajectory: List[Tuple[int, int, float, float]] = []

    def record(self, restart: int, iteration: int, grid: Grid, value: float) -> None:
        if value < self.value:
            self.grid, self.value = grid, value
        self.trajectory.append((restart, iteration, value, self.value))
        logger.info("restart %d iteration %d: %.6g (best %.6g)", restart, iteration, value, self.value)

    def merge(self, other: "_Tracker") -> None:
        # replays a later restart, ties keep the earlier grid
        for restart, iteration, value, best in other.trajectory:
            self.trajectory.append((restart, iteration, value, min(self.value, best)))
        if other.value < self.value:
            self.grid, self.value = other.grid, other.value


def _run_gradient(
    dist: DistributionSpec,
    n: int,
    p: float,
    norm: NormSpec,
    config: OptimizerConfig,
    rng: RngStream,
    restart: int,
) -> _Tracker:
    anchors = torch.zeros(0, dist.dim, dtype=torch.float64) if config.extended else _hull_anchors(dist, n)
    if len(anchors) > n:
        raise TooFewPoints(f"{n} points cannot hold the {len(anchors)} vertices enclosing the support of {dist}")
    tracker = _Tracker()
    stream = rng.substream(restart)
    gen = stream.substream(1).generator()
    eval_stream = rng.substream(_EVAL_STREAM)

    def evaluate(grid: Grid) -> float:
        return estimate_distortion(dist, grid, p, norm, config.samples_per_eval, eval_stream, config.extended).estimate_p

    points, pinned = _initial_points(dist, n, anchors, restart, stream.substream(0).generator())
    pinned_values = points[pinned].clone()
    grid = _repair(points, pinned, dist, gen)
    points = grid.points
    initial = evaluate(grid)
    tracker.record(restart, 0, grid, initial)

    every = max(config.iterations // config.checkpoints, 1)
    tail = config.iterations - int(config.averaging * config.iterations)
    batch = config.effective_batch_size
    last_active = torch.zeros(len(points), dtype=torch.long)
    average, averaged = torch.zeros_like(points), 0

    for t in range(1, config.iterations + 1):
        grad = torch.zeros_like(points)
        for site in dist.draw(batch, gen):
            g = envelope_gradient(grid, site, p, norm, extended=True)
            last_active[(g != 0).any(dim=1)] = t
            grad += g
        points = points - config.step(t) * grad / batch
        if not torch.isfinite(points).all():
            raise Diverged(f"non-finite grid point at iteration {t} of restart {restart}")
        points[pinned] = pinned_values

        idle = (t - last_active > config.reseed_after) & ~pinned
        if idle.any():
            logger.debug("redrawing %d idle points at iteration %d", int(idle.sum()), t)
            points[idle] = dist.draw(int(idle.sum()), gen)
            last_active[idle] = t
        grid = _repair(points, pinned, dist, gen)
        if len(grid) < len(points):
            pinned = pinned[: len(grid)]
            last_active = last_active[: len(grid)]
            average = average[: len(grid)]
        points = grid.points

        if t > tail:
            average = average + points
            averaged += 1
        if t % every == 0 or t == config.iterations:
            value = evaluate(grid)
            if initial > 0 and value > _DIVERGENCE_FACTOR * initial:
                raise Diverged(f"objective {value:.6g} exceeds {_DIVERGENCE_FACTOR:g} times its initial value {initial:.6g}")
            tracker.record(restart, t, grid, value)

    if averaged > 1:
        grid = Grid.from_points(average / averaged, dedupe=True)
        tracker.record(restart, config.iterations, grid, evaluate(grid))
    return tracker


def _map_restarts(fn, config: OptimizerConfig) -> List[_Tracker]:
    # trackers in restart order
    restarts = range(config.restarts)
    if config.workers <= 1 or config.restarts <= 1:
        return [fn(r) for r in restarts]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, restarts))


def optimize_grid(
    dist: DistributionSpec, n: int, p: float, norm="l2", config: OptimizerConfig = OptimizerConfig()
) -> OptimizationResult:
    r"""Search a grid of size :math:`n` minimizing the dual distortion

    Gradient methods follow the envelope gradient of :math:`F_p^p(X; \Gamma)` with the steps
    :math:`a / (b + t)`, averaging the last iterates and redrawing points that stop being used. Without the
    extended objective the vertices of a box or simplex enclosing the support are kept fixed, so that the hull of
    the grid always covers the support. Restart 0 on a uniform cube starts from the regular lattice when
    :math:`n` is a perfect :math:`d`-th power. All checkpoints are evaluated on a common stream and the best one
    is kept, its final report uses another stream. Restarts run on ``config.workers`` threads and
    draw from their own streams, so the result does not depend on the number of workers.

    Parameters
    ----------
    dist : `dualquant.core.DistributionSpec`

    n : int

    p : float

    norm : `dualquant.core.NormSpec`

    config : `OptimizerConfig`

    Returns
    -------
    `OptimizationResult`
        a grid of at most :math:`n` points

    Raises
    ------
    `TooFewPoints`
        if :math:`n < d + 1` for a full-dimensional bounded support and the non-extended objective

    `Diverged`
        if the objective exceeds 10 times its initial value
    """
    norm = NormSpec(norm)
    _check_inputs(dist, n, p, config)
    rng = RngStream(config.seed)
    final_samples = config.final_samples or config.samples_per_eval
    tracker = _Tracker()

    if isinstance(dist, Empirical) and dist.support_size() <= n:
        tracker.record(0, 0, Grid(torch.unique(dist.atoms, dim=0)), 0.0)
    elif config.method == "exhaustive_1d":
        if config.extended:
            raise ValueError("exhaustive_1d optimizes the non-extended objective only")
        knots, values = exhaustive_1d(dist, n, p, config.mesh, config.samples_per_eval, rng.substream(3))
        tracker.record(0, 0, knots.to_grid(), values[0])
        tracker.record(0, 1, knots.to_grid(), values[1])
    else:
        for run in _map_restarts(lambda r: _run_gradient(dist, n, p, norm, config, rng, r), config):
            tracker.merge(run)

    final = estimate_distortion(dist, tracker.grid, p, norm, final_samples, rng.substream(_FINAL_STREAM), config.extended)
    logger.info("optimized %d points: distortion %.6g +- %.2g", len(tracker.grid), final.estimate, final.estimate_std_error)
    return OptimizationResult(grid=tracker.grid, final_report=final, trajectory=tracker.trajectory, config=config)


def regular_quantization_distortion(
    dist: DistributionSpec, grid, p: float, norm="l2", samples: int = 2**16, rng: RngStream = RngStream(0)
) -> DistortionReport:
    r"""Monte Carlo estimate of the nearest neighbour distortion :math:`\mathbb{E}[\min_i \|X - x_i\|^p]`

    Examples
    --------
    >>> from dualquant.core import UniformCube
    >>> r = regular_quantization_distortion(UniformCube([0.0]), Grid([0.5]), 2, samples=10)
    >>> r.functional
    'nearest'
    """
    return estimate_functionals(dist, grid, p, norm, samples, rng, ("nearest",))["nearest"]

