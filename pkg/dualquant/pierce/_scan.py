r"""Random quantization of heavy-tailed laws by Pareto order statistics

For a law with a finite moment of order :math:`p + \eta`, the envelope :math:`A_{p,n}` of the random knots

.. math::

    \{0\} \cup \left\{ s (Y^{(N)}_i - 1) : 1 \leq i < n \right\}

built from :math:`N = n + \lceil p / \delta \rceil - 2` Pareto(:math:`\delta`) draws, with :math:`\delta \in (0, p/\eta)`
and :math:`s = \|X\|_{L^{p+\eta}}`, decays like :math:`n^{-1}`. Laws with a negative part use one such set of knots
on each side of :math:`0`.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import torch

from dualquant.core import DistributionSpec, RngStream, pareto_order_statistics, sample
from dualquant.util import RunningMoments, integer_root, prod

from ._splitting import ERROR_FUNCTIONALS, splitting_error

logger = logging.getLogger(__name__)

_PILOT_STREAM = 2**32
_PILOT_SIZE = 2**14


class MomentWarning(UserWarning):
    r"""The empirical moment of order :math:`p + \eta` does not look finite"""


@dataclass(frozen=True)
class PierceScanRow:
    r"""One row of a random quantization scan

    Attributes
    ----------
    n : int
        number of grid points actually used

    error_p_root : float
        estimate of :math:`\mathbb{E}[\mathrm{error}^p]^{1/p}`

    normalized : float
        :math:`n^{1/d}` times ``error_p_root``

    std_error : float
        standard error of ``error_p_root``
    """

    n: int
    error_p_root: float
    normalized: float
    std_error: float


def default_delta(p: float, eta: float) -> float:
    r"""The midpoint :math:`p / (2 \eta)` of the admissible interval :math:`(0, p / \eta)`"""
    return p / (2.0 * eta)


def _check(p: float, eta: float, delta: Optional[float], functional: str) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if delta is None:
        delta = default_delta(p, eta)
    if not 0 < delta < p / eta:
        raise ValueError(f"delta must lie in (0, p/eta) = (0, {p / eta:g}), got {delta}")
    if functional not in ERROR_FUNCTIONALS:
        raise ValueError(f"functional must be one of {ERROR_FUNCTIONALS}, got {functional!r}")
    return delta


def one_sided_knots(count: int, p: float, delta: float, rng: RngStream, scale: float = 1.0) -> torch.Tensor:
    r"""Knots :math:`s \cdot (\{0\} \cup \{Y^{(N)}_i - 1\}_{i < \mathrm{count}})`

    Parameters
    ----------
    count : int
        number of knots, at least 2

    p : float

    delta : float
        Pareto index

    rng : `dualquant.core.RngStream`

    scale : float
        the factor :math:`s > 0`

    Returns
    -------
    `torch.Tensor`
        non-decreasing tensor of shape :math:`(\mathrm{count})` starting at 0
    """
    if count < 2:
        raise ValueError(f"at least two knots are needed, got {count}")
    extra = max(math.ceil(p / delta) - 1, 0)
    y = pareto_order_statistics(count - 1 + extra, delta, rng)[: count - 1]
    return scale * torch.cat([torch.zeros(1, dtype=torch.float64), y - 1.0])


def random_knots(count: int, p: float, delta: float, rng: RngStream, scales, two_sided: bool) -> torch.Tensor:
    r"""Random knots of one axis

    One-sided knots use ``count`` points. Two-sided knots put :math:`h = \lfloor (\mathrm{count} - 1) / 2 \rfloor`
    points on each side of a shared :math:`0`, :math:`2h + 1` in total.

    Parameters
    ----------
    scales : tuple of float
        the factors of the positive and of the negative side
    """
    positive, negative = scales
    if not two_sided:
        return one_sided_knots(count, p, delta, rng.substream(0), positive)
    h = (count - 1) // 2
    if h < 1:
        raise ValueError(f"two-sided knots need at least 3 points, got {count}")
    right = one_sided_knots(h + 1, p, delta, rng.substream(0), positive)
    left = one_sided_knots(h + 1, p, delta, rng.substream(1), negative)
    return torch.cat([-left.flip(0), right[1:]])


def knots_count(count: int, two_sided: bool) -> int:
    return 2 * ((count - 1) // 2) + 1 if two_sided else count


def _pilot(dist: DistributionSpec, q: float, rng: RngStream):
    # per axis side scales ||X_+||_q, ||X_-||_q and a divergence check of E|X|^q on nested prefixes
    x = sample(dist, rng.substream(_PILOT_STREAM), _PILOT_SIZE)
    scales = []
    for j in range(dist.dim):
        col = x[:, j]
        side = []
        for part in (col.clamp(min=0.0), (-col).clamp(min=0.0)):
            s = part.pow(q).mean().item() ** (1.0 / q)
            side.append(s if s > 0 else 1.0)
        scales.append(tuple(side))

        moments = [col[:k].abs().pow(q).mean().item() for k in (_PILOT_SIZE // 16, _PILOT_SIZE // 4, _PILOT_SIZE)]
        exact = dist.moment(q) if dist.dim == 1 else None
        if (exact is not None and math.isinf(exact)) or (
            moments[0] > 0 and moments[0] < moments[1] < moments[2] and moments[2] > 2 * moments[0]
        ):
            warnings.warn(
                f"the moment of order {q:g} of axis {j} looks infinite (prefix estimates {moments})",
                MomentWarning,
            )
    return scales


def _scan(
    dist: DistributionSpec,
    p: float,
    eta: float,
    delta: float,
    counts: Sequence[int],
    samples: int,
    rng: RngStream,
    functional: str,
    replicates: int,
) -> List[PierceScanRow]:
    if samples < 1 or replicates < 1:
        raise ValueError(f"samples and replicates must be >= 1, got {samples} and {replicates}")
    d = dist.dim
    two_sided = [bool(lo < 0) for lo in dist.lower_bounds().tolist()]
    scales = _pilot(dist, p + eta, rng)
    per_replicate = math.ceil(samples / replicates)

    rows = []
    for requested, per_axis in counts:
        base = rng.substream(requested)
        acc = RunningMoments()
        for r in range(replicates):
            knots = [
                random_knots(per_axis, p, delta, base.substream(2 * r).substream(j), scales[j], two_sided[j])
                for j in range(d)
            ]
            x = sample(dist, base.substream(2 * r + 1), per_replicate)
            acc.update(sum(splitting_error(functional, k, x[:, j].contiguous(), p) for j, k in enumerate(knots)))

        n = prod(knots_count(per_axis, s) for s in two_sided)
        mean = max(acc.mean, 0.0)
        error = mean ** (1.0 / p)
        std = acc.std_error * mean ** (1.0 / p - 1.0) / p if mean > 0 else 0.0
        row = PierceScanRow(n=n, error_p_root=error, normalized=n ** (1.0 / d) * error, std_error=std)
        logger.info("%s scan n=%d error=%.6g normalized=%.6g", functional, row.n, row.error_p_root, row.normalized)
        rows.append(row)
    return rows


def pierce_scan_1d(
    dist: DistributionSpec,
    p: float,
    eta: float,
    delta: Optional[float] = None,
    n_values: Sequence[int] = (16, 64, 256, 1024),
    samples: int = 2**16,
    rng: RngStream = RngStream(0),
    functional: str = "envelope",
    replicates: int = 32,
) -> List[PierceScanRow]:
    r"""Random quantization scan of a law of the real line

    For every :math:`n`, draws ``replicates`` random knot sets and estimates the error of ``functional``
    on ``samples`` draws of :math:`X` in total. Nonnegative laws use :math:`n` one-sided knots starting at
    :math:`0`, other laws :math:`2 \lfloor (n-1)/2 \rfloor + 1` knots split at :math:`0`.

    Parameters
    ----------
    dist : `dualquant.core.DistributionSpec`
        a law of the real line with a finite moment of order :math:`p + \eta`

    p : float

    eta : float

    delta : float, optional
        Pareto index in :math:`(0, p / \eta)`, defaults to :math:`p / (2 \eta)`

    n_values : list of int

    samples : int

    rng : `dualquant.core.RngStream`

    functional : {"envelope", "dual", "voronoi"}

    replicates : int

    Returns
    -------
    list of `PierceScanRow`
        ``normalized`` is :math:`n` times the error

    Warns
    -----
    `MomentWarning`
        if the moment of order :math:`p + \eta` looks infinite
    """
    if dist.dim != 1:
        raise ValueError(f"expected a law of the real line, got dimension {dist.dim}")
    delta = _check(p, eta, delta, functional)
    return _scan(dist, p, eta, delta, [(n, n) for n in n_values], samples, rng, functional, replicates)


def pierce_scan_product(
    dist: DistributionSpec,
    p: float,
    eta: float,
    n_values: Sequence[int] = (64, 256, 1024),
    samples: int = 2**16,
    rng: RngStream = RngStream(0),
    delta: Optional[float] = None,
    functional: str = "envelope",
    replicates: int = 32,
) -> List[PierceScanRow]:
    r"""Random product quantization scan of a law of :math:`\mathbb{R}^d` under the :math:`\ell^p` norm

    Each axis gets :math:`\lfloor n^{1/d} \rfloor` random knots built as in `pierce_scan_1d` from its own
    marginal, the error is the sum of the axis errors (product decomposition) and sites outside the product
    box fall back to the nearest knot of each axis.

    Returns
    -------
    list of `PierceScanRow`
        ``normalized`` is :math:`n^{1/d}` times the error, :math:`n` the number of grid points used
    """
    delta = _check(p, eta, delta, functional)
    counts = [(n, integer_root(n, dist.dim)) for n in n_values]
    return _scan(dist, p, eta, delta, counts, samples, rng, functional, replicates)
