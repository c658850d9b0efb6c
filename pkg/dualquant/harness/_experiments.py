r"""Experiments of the command line

Every row is computed from its own stream ``RngStream(seed).substream(n)``, so rows are reproducible one by one
and do not depend on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, List, Sequence, Tuple

import scipy.stats

from dualquant.core import Grid, NormSpec, RngStream, UniformCube, UniformCubeUnion, as_point
from dualquant.dq import (
    AnyGrid,
    OutsideHull,
    estimate_distortion,
    estimate_functionals,
    local_error,
    local_error_extended,
)
from dualquant.optimize import optimize_grid
from dualquant.pierce import pierce_scan_1d, pierce_scan_product
from dualquant.structured import OrderedGrid1D, ProductGrid, cubewise_grid, dual_coefficient_1d, uniform_knots
from dualquant.util import integer_root

from ._config import ExperimentConfig
from ._io import load_grid_file

logger = logging.getLogger(__name__)

RATE_SCAN_COLUMNS = ("n", "d", "p", "estimate", "std_error", "normalized", "grid_source", "seed")
COMPARISON_COLUMNS = ("n", "dual_estimate", "extended_estimate", "voronoi_estimate")
PIERCE_COLUMNS = ("n", "error", "normalized", "std_error")
DISTORTION_COLUMNS = ("n", "d", "p", "norm", "functional", "estimate_p", "std_error", "estimate", "samples", "seed")
OPTIMIZE_COLUMNS = ("n", "d", "p", "estimate", "std_error", "normalized", "method", "seed")
ZADOR_COLUMNS = ("n", "d", "p", "estimate", "std_error", "normalized", "density_norm", "ratio", "seed")
QDQ_COLUMNS = ("d", "r", "p", "empirical_q", "limit", "bound", "passed")


class DegenerateInput(ValueError):
    r"""Not enough usable rows"""


class HypothesisViolation(ValueError):
    r"""The bound does not apply to these parameters"""


@dataclass(frozen=True)
class RateScanRow:
    r"""One row of a rate scan

    Attributes
    ----------
    n : int
        size of the grid actually used

    d : int

    p : float

    estimate : float
        :math:`d_p(X; \Gamma)` or :math:`\bar d_p(X; \Gamma)`, ``nan`` if the row failed

    std_error : float

    normalized : float
        :math:`n^{1/d}` times ``estimate``

    grid_source : str

    seed : int

    failed : bool
        a sample escaped the hull of the grid
    """

    n: int
    d: int
    p: float
    estimate: float
    std_error: float
    normalized: float
    grid_source: str
    seed: int
    failed: bool = False

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class QdqBoundReport:
    r"""Outcome of `check_qdq_bound`

    Attributes
    ----------
    empirical_q : float
        estimate of the coefficient :math:`\lim_n n^{1/d} d_{n,p}`, lowered by three standard errors

    limit : float
        the extrapolated limit alone, ``nan`` with fewer than two sizes

    bound : float
        :math:`d^{1/r} (2 / ((p+1)(p+2)))^{1/p}`

    passed : bool
        ``empirical_q <= bound``
    """

    d: int
    r: float
    p: float
    empirical_q: float
    limit: float
    bound: float
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _map_rows(fn: Callable, items: Sequence, workers: int) -> List:
    # results keep the order of items
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _grid_size(grid: AnyGrid) -> int:
    return len(grid) if isinstance(grid, Grid) else grid.size


def lattice_for(dist, n: int) -> AnyGrid:
    r"""Regular lattice with :math:`\lfloor n^{1/d} \rfloor` knots per axis on the bounding box of ``dist``

    ``n = 1`` gives the center of the box. Flat axes of the box carry a single knot.
    """
    if not dist.is_bounded:
        raise ValueError(f"lattice grids need a bounded support, {dist} is unbounded")
    lo, hi = dist.bounding_box()
    if n == 1 or bool((hi <= lo).all()):
        return Grid(((lo + hi) / 2)[None])
    m = integer_root(n, dist.dim)
    if m < 2:
        raise ValueError(f"a lattice in dimension {dist.dim} needs n >= {2 ** dist.dim}, got {n}")
    axes = [uniform_knots(m, a, b) if b > a else OrderedGrid1D([a]) for a, b in zip(lo.tolist(), hi.tolist())]
    if dist.dim == 1:
        return axes[0]
    return ProductGrid(axes)


def build_grid(config: ExperimentConfig, n: int) -> AnyGrid:
    r"""The grid of size at most ``n`` named by ``config.grid_source``"""
    source = config.grid_source
    if source == "lattice":
        return lattice_for(config.distribution, n)
    if source == "explicit-file":
        return load_grid_file(config.grid_file)
    if source == "cubewise":
        if not isinstance(config.distribution, UniformCubeUnion):
            raise ValueError(f"cubewise grids need a union of cubes, got {config.distribution}")
        return cubewise_grid(config.distribution, n, config.p)
    optimizer = replace(config.optimizer, seed=config.seed, extended=config.extended, workers=config.workers)
    return optimize_grid(config.distribution, n, config.p, config.norm, optimizer).grid


def _n_values(config: ExperimentConfig) -> Tuple[int, ...]:
    # a grid file has a single size
    if config.grid_source == "explicit-file":
        return config.n_values[:1]
    return tuple(config.n_values)


def _row_stream(config: ExperimentConfig, n: int) -> RngStream:
    return RngStream(config.seed).substream(n)


def rate_scan_row(config: ExperimentConfig, n: int) -> RateScanRow:
    grid = build_grid(config, n)
    size = _grid_size(grid)
    d = config.distribution.dim
    try:
        report = estimate_distortion(
            config.distribution, grid, config.p, config.norm, config.samples, _row_stream(config, n), config.extended
        )
    except OutsideHull as e:
        logger.warning("row n=%d failed, a sample escapes the hull of the grid: %s", size, e)
        nan = float("nan")
        return RateScanRow(size, d, config.p, nan, nan, nan, config.grid_source, config.seed, failed=True)
    estimate = report.estimate
    row = RateScanRow(
        n=size,
        d=d,
        p=config.p,
        estimate=estimate,
        std_error=report.estimate_std_error,
        normalized=size ** (1.0 / d) * estimate,
        grid_source=config.grid_source,
        seed=config.seed,
    )
    logger.info("rate scan n=%d estimate=%.6g normalized=%.6g", row.n, row.estimate, row.normalized)
    return row


def run_rate_scan(config: ExperimentConfig) -> List[RateScanRow]:
    r"""Distortion of the grids of the configured sizes, one `RateScanRow` per size

    Rows are ordered like ``config.n_values``. A row where a sample escapes the hull of its grid is flagged
    ``failed`` and carries ``nan``.
    """
    return _map_rows(lambda n: rate_scan_row(config, n), _n_values(config), config.workers)


def fit_rate(rows: Sequence) -> Tuple[float, float, float]:
    r"""Least squares fit of :math:`\log(\mathrm{estimate})` on :math:`\log(n)`

    Parameters
    ----------
    rows : sequence of `RateScanRow` or of ``(n, estimate)`` pairs
        failed rows and non-positive estimates are skipped

    Returns
    -------
    slope : float

    intercept : float

    r_squared : float

    Raises
    ------
    `DegenerateInput`
        with fewer than 3 usable rows or a single value of :math:`n`

    Examples
    --------
    >>> slope, intercept, r2 = fit_rate([(n, 1.0 / n) for n in (2, 4, 8, 16)])
    >>> round(slope, 12), round(r2, 12)
    (-1.0, 1.0)
    """
    pairs = []
    for row in rows:
        n, estimate = (row.n, row.estimate) if isinstance(row, RateScanRow) else row
        if math.isfinite(estimate) and estimate > 0:
            pairs.append((n, estimate))
    if len(pairs) < 3:
        raise DegenerateInput(f"a rate fit needs at least 3 rows with a positive estimate, got {len(pairs)}")
    x = [math.log(n) for n, _ in pairs]
    y = [math.log(e) for _, e in pairs]
    if max(x) == min(x):
        raise DegenerateInput(f"a rate fit needs several values of n, got only n={pairs[0][0]}")
    fit = scipy.stats.linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue) ** 2


def qdq_bound(d: int, r: float, p: float) -> float:
    r"""Upper bound :math:`d^{1/r} (2 / ((p+1)(p+2)))^{1/p}` of the dual coefficient of the unit cube under :math:`\ell^r`"""
    return d ** (1.0 / r) * dual_coefficient_1d(p)


def _extrapolate(rows: Sequence[RateScanRow], d: int) -> Tuple[float, float]:
    # normalized = q + c n^{-1/d} + ..., the intercept is the limit
    x = [row.n ** (-1.0 / d) for row in rows]
    y = [row.normalized for row in rows]
    fit = scipy.stats.linregress(x, y)
    stderr = float(getattr(fit, "intercept_stderr", float("nan")))
    return float(fit.intercept), stderr if math.isfinite(stderr) else 0.0


def check_qdq_bound(d: int, r: float, p: float, rows: Sequence[RateScanRow]) -> QdqBoundReport:
    r"""Compare a scan of :math:`U([0,1]^d)` under :math:`\ell^r` with the bound of its dual coefficient

    The coefficient is a limit and finite grids approach it from above, so the normalized column is
    extrapolated linearly in :math:`n^{-1/d}` when the scan has several sizes. The empirical coefficient is the
    smaller of this limit and of the rows :math:`n^{1/d}\,\mathrm{estimate}`, each lowered by three standard errors.

    Raises
    ------
    `HypothesisViolation`
        if :math:`r > p`

    `DegenerateInput`
        if no row succeeded
    """
    if r > p:
        raise HypothesisViolation(f"the bound holds for r <= p, got r={r:g} > p={p:g}")
    usable = [row for row in rows if not row.failed and math.isfinite(row.normalized)]
    if not usable:
        raise DegenerateInput("no successful row to check the bound on")
    empirical = min(row.normalized - 3.0 * row.n ** (1.0 / d) * row.std_error for row in usable)
    limit = float("nan")
    if len({row.n for row in usable}) >= 2:
        limit, stderr = _extrapolate(usable, d)
        pooled = max(row.n ** (1.0 / d) * row.std_error for row in usable)
        empirical = min(empirical, limit - 3.0 * max(stderr, pooled))
    bound = qdq_bound(d, r, p)
    report = QdqBoundReport(d=d, r=r, p=p, empirical_q=empirical, limit=limit, bound=bound, passed=empirical <= bound)
    logger.info("empirical coefficient %.6g (limit %.6g) against bound %.6g", empirical, limit, bound)
    return report


def run_check_qdq_bound(config: ExperimentConfig) -> Tuple[List[RateScanRow], QdqBoundReport]:
    r"""Rate scan of a uniform cube followed by `check_qdq_bound`"""
    dist = config.distribution
    if not isinstance(dist, UniformCube):
        raise ValueError(f"the bound concerns uniform laws on a cube, got {dist}")
    rows = run_rate_scan(config)
    return rows, check_qdq_bound(dist.dim, config.norm.r, config.p, rows)


def comparison_row(config: ExperimentConfig, n: int) -> Dict[str, Any]:
    grid = build_grid(config, n)
    rng = _row_stream(config, n)
    args = (config.distribution, grid, config.p, config.norm, config.samples, rng)
    try:
        reports = estimate_functionals(*args, ("dual", "extended", "nearest"))
        dual = reports["dual"].estimate
    except OutsideHull:
        logger.warning("row n=%d: a sample escapes the hull, the dual distortion is infinite", n)
        reports = estimate_functionals(*args, ("extended", "nearest"))
        dual = float("inf")
    row = dict(
        n=_grid_size(grid),
        dual_estimate=dual,
        extended_estimate=reports["extended"].estimate,
        voronoi_estimate=reports["nearest"].estimate,
    )
    logger.info("comparison %s", row)
    return row


def run_comparison(config: ExperimentConfig) -> List[Dict[str, Any]]:
    r"""Dual, extended dual and nearest neighbour distortions of the same grid on the same draws

    The three functionals are evaluated on each draw, so ``voronoi_estimate <= extended_estimate <= dual_estimate``
    holds exactly on every row.
    """
    return _map_rows(lambda n: comparison_row(config, n), _n_values(config), config.workers)


def run_pierce_scan(config: ExperimentConfig) -> List[Dict[str, Any]]:
    r"""Random quantization scan, `dualquant.pierce.pierce_scan_1d` or `dualquant.pierce.pierce_scan_product`"""
    rng = RngStream(config.seed)
    dist = config.distribution
    kwargs = dict(
        delta=config.delta,
        n_values=config.n_values,
        samples=config.samples,
        rng=rng,
        functional=config.functional,
        replicates=config.replicates,
    )
    if dist.dim == 1:
        rows = pierce_scan_1d(dist, config.p, config.eta, **kwargs)
    else:
        rows = pierce_scan_product(dist, config.p, config.eta, **kwargs)
    return [dict(n=r.n, error=r.error_p_root, normalized=r.normalized, std_error=r.std_error) for r in rows]


def run_distortion(config: ExperimentConfig) -> List[Dict[str, Any]]:
    r"""Full `dualquant.dq.DistortionReport` of the grid of each configured size"""

    def row(n: int) -> Dict[str, Any]:
        grid = build_grid(config, n)
        report = estimate_distortion(
            config.distribution, grid, config.p, config.norm, config.samples, _row_stream(config, n), config.extended
        )
        return dict(
            n=_grid_size(grid),
            d=config.distribution.dim,
            p=config.p,
            norm=repr(config.norm),
            functional="extended" if config.extended else "dual",
            estimate_p=report.estimate_p,
            std_error=report.std_error,
            estimate=report.estimate,
            samples=report.samples,
            seed=config.seed,
        )

    return _map_rows(row, _n_values(config), config.workers)


def run_optimize(config: ExperimentConfig) -> Tuple[List[Dict[str, Any]], List[Grid]]:
    r"""Optimized grid of each configured size, with its final report"""
    optimizer = replace(config.optimizer, seed=config.seed, extended=config.extended, workers=config.workers)
    rows, grids = [], []
    for n in config.n_values:
        result = optimize_grid(config.distribution, n, config.p, config.norm, optimizer)
        report = result.final_report
        size, d = len(result.grid), config.distribution.dim
        rows.append(
            dict(
                n=size,
                d=d,
                p=config.p,
                estimate=report.estimate,
                std_error=report.estimate_std_error,
                normalized=size ** (1.0 / d) * report.estimate,
                method=optimizer.method,
                seed=config.seed,
            )
        )
        grids.append(result.grid)
    return rows, grids


def run_zador_scan(config: ExperimentConfig) -> List[Dict[str, Any]]:
    r"""Extended distortion of cubewise grids of a union of cubes, against the density functional

    ``ratio`` is :math:`n^{1/d} \bar d_p / \|h\|_{d/(d+p)}^{1/p}`, which approaches the coefficient of the unit cube.
    """
    dist = config.distribution
    if not isinstance(dist, UniformCubeUnion):
        raise ValueError(f"the Zador scan needs a union of cubes, got {dist}")
    density = dist.density_norm(config.p) ** (1.0 / config.p)

    def row(n: int) -> Dict[str, Any]:
        grid = cubewise_grid(dist, n, config.p)
        report = estimate_distortion(dist, grid, config.p, config.norm, config.samples, _row_stream(config, n), True)
        size, d = len(grid), dist.dim
        normalized = size ** (1.0 / d) * report.estimate
        logger.info("zador scan n=%d normalized=%.6g ratio=%.6g", size, normalized, normalized / density)
        return dict(
            n=size,
            d=d,
            p=config.p,
            estimate=report.estimate,
            std_error=report.estimate_std_error,
            normalized=normalized,
            density_norm=density,
            ratio=normalized / density,
            seed=config.seed,
        )

    return _map_rows(row, tuple(config.n_values), config.workers)


def fp_eval(site, grid: Grid, p: float, norm="l2", extended: bool = False) -> Dict[str, Any]:
    r"""Local error at one site with its certificate, as a flat record

    Raises
    ------
    `dualquant.dq.OutsideHull`
        outside the hull of the grid unless ``extended``
    """
    norm = NormSpec(norm)
    site = as_point(site, dim=grid.dim)
    result = local_error_extended(site, grid, p, norm) if extended else local_error(site, grid, p, norm)
    record: Dict[str, Any] = dict(
        site=" ".join(f"{x:.17g}" for x in site.tolist()),
        p=float(p),
        norm=repr(norm),
        branch=result.branch,
        value_p=result.value_p,
        value=result.value,
        support="",
        weights="",
        duals="",
        min_reduced_cost=float("nan"),
        nearest_index=-1 if result.nearest_index is None else result.nearest_index,
    )
    cert = result.certificate
    if cert is not None:
        record.update(
            support=" ".join(str(i) for i in cert.support),
            weights=" ".join(f"{w:.17g}" for w in cert.weights.tolist()),
            duals=" ".join(f"{y:.17g}" for y in cert.duals.tolist()),
            min_reduced_cost=cert.min_reduced_cost,
        )
    return record


FP_EVAL_COLUMNS = (
    "site",
    "p",
    "norm",
    "branch",
    "value_p",
    "value",
    "support",
    "weights",
    "duals",
    "min_reduced_cost",
    "nearest_index",
)

