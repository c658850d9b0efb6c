r"""Samplable probability laws on :math:`\mathbb{R}^d`.

All samplers use explicit transforms of uniform or normal draws so that other implementations can match them in
distribution:

- uniform cube: :math:`a + \ell U`, :math:`U \sim U([0,1)^d)`
- union of cubes: cube index by `torch.multinomial` on the weights, then a uniform point in the cube
- gaussian: `torch.randn`
- exponential: inverse CDF :math:`-\log(1 - U) / \theta`
- pareto: inverse CDF :math:`(1 - U)^{-1/\delta}`, supported on :math:`[1, \infty)`
- empirical: uniform index by `torch.randint`
"""
import math
from typing import Optional, Sequence, Tuple

import torch

from ._grid import as_point
from ._rng import RngStream

SHARD_SIZE = 2**14


class DistributionSpec:
    r"""Base class of the probability laws

    Subclasses implement ``dim``, ``draw`` and ``bounding_box``.
    """

    dim: int

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        raise NotImplementedError

    @property
    def is_bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(torch.isfinite(lo).all() and torch.isfinite(hi).all())

    def bounding_box(self) -> Tuple[torch.Tensor, torch.Tensor]:
        r"""Smallest axis-parallel box containing the support, as ``(lower, upper)``"""
        raise NotImplementedError

    def lower_bounds(self) -> torch.Tensor:
        return self.bounding_box()[0]

    def support_affine_dim(self) -> int:
        return self.dim

    def support_size(self) -> float:
        r"""Number of atoms of the law, ``inf`` for diffuse laws"""
        return math.inf

    def moment(self, q: float) -> Optional[float]:
        r""":math:`\mathbb{E} \|X\|_{\ell^2}^q` when known in closed form, else ``None``"""
        return None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(d={self.dim})"


class UniformCube(DistributionSpec):
    r"""Uniform law on the hypercube :math:`a + \ell [0, 1]^d`

    Parameters
    ----------
    corner : sequence of float
        the corner :math:`a`

    edge : float
        the edge length :math:`\ell > 0`
    """

    def __init__(self, corner, edge: float = 1.0) -> None:
        self.corner = as_point(corner)
        self.edge = float(edge)
        if not self.edge > 0:
            raise ValueError(f"edge length must be positive, got {edge}")
        self.dim = self.corner.numel()

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        u = torch.rand(count, self.dim, generator=generator, dtype=torch.float64)
        return self.corner + self.edge * u

    def bounding_box(self):
        return self.corner.clone(), self.corner + self.edge

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(corner={self.corner.tolist()}, edge={self.edge:g})"


def _cubes_overlap(a: torch.Tensor, b: torch.Tensor, edge: float) -> bool:
    # half-open cubes [a, a + edge) are disjoint iff they are separated along one axis
    return bool(((a - b).abs() < edge).all())


class UniformCubeUnion(DistributionSpec):
    r"""Mixture :math:`\sum_i s_i \, \mathcal{U}(C_i)` of uniform laws on disjoint cubes of common edge length

    Parameters
    ----------
    corners : sequence of points
        corners :math:`a_i` of the cubes :math:`C_i = a_i + \ell [0, 1)^d`

    edge : float
        common edge length :math:`\ell`

    weights : sequence of float, optional
        the :math:`s_i`, positive and summing to one. Defaults to equal weights.
    """

    def __init__(self, corners: Sequence, edge: float = 1.0, weights: Optional[Sequence[float]] = None) -> None:
        corners = torch.as_tensor(corners, dtype=torch.float64)
        if corners.dim() == 1:
            corners = corners[:, None]
        if corners.dim() != 2 or len(corners) < 1:
            raise ValueError("corners must be a non-empty list of points")
        self.corners = corners
        self.edge = float(edge)
        if not self.edge > 0:
            raise ValueError(f"edge length must be positive, got {edge}")
        self.dim = corners.shape[1]

        if weights is None:
            weights = torch.full((len(corners),), 1.0 / len(corners), dtype=torch.float64)
        self.weights = torch.as_tensor(weights, dtype=torch.float64)
        if self.weights.shape != (len(corners),):
            raise ValueError(f"expected {len(corners)} weights, got {self.weights.tolist()}")
        if (self.weights <= 0).any():
            raise ValueError(f"weights must be positive, got {self.weights.tolist()}")
        if abs(self.weights.sum().item() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got sum {self.weights.sum().item()!r}")

        for i in range(len(corners)):
            for j in range(i + 1, len(corners)):
                if _cubes_overlap(corners[i], corners[j], self.edge):
                    raise ValueError(f"cubes {i} and {j} overlap")

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        which = torch.multinomial(self.weights, count, replacement=True, generator=generator)
        u = torch.rand(count, self.dim, generator=generator, dtype=torch.float64)
        return self.corners[which] + self.edge * u

    def bounding_box(self):
        return self.corners.min(0).values, self.corners.max(0).values + self.edge

    def density_norm(self, p: float) -> float:
        r""":math:`\|h\|_{d/(d+p)} = \ell^p \left( \sum_i s_i^{d/(d+p)} \right)^{(d+p)/d}` for the density :math:`h`"""
        d = self.dim
        q = d / (d + p)
        return self.edge**p * self.weights.pow(q).sum().item() ** (1 / q)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(cubes={len(self.corners)}, d={self.dim}, edge={self.edge:g})"


class Gaussian(DistributionSpec):
    r"""Standard normal law :math:`\mathcal{N}(0, I_d)`"""

    def __init__(self, dim: int = 1) -> None:
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        return torch.randn(count, self.dim, generator=generator, dtype=torch.float64)

    def bounding_box(self):
        inf = torch.full((self.dim,), math.inf, dtype=torch.float64)
        return -inf, inf

    def moment(self, q: float) -> float:
        # chi distribution with d degrees of freedom
        return 2 ** (q / 2) * math.exp(math.lgamma((self.dim + q) / 2) - math.lgamma(self.dim / 2))


class Exponential(DistributionSpec):
    r"""Independent exponential coordinates with rate :math:`\theta`"""

    def __init__(self, rate: float = 1.0, dim: int = 1) -> None:
        if not rate > 0:
            raise ValueError(f"rate must be positive, got {rate}")
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.rate = float(rate)
        self.dim = int(dim)

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        u = torch.rand(count, self.dim, generator=generator, dtype=torch.float64)
        return -torch.log1p(-u) / self.rate

    def bounding_box(self):
        return torch.zeros(self.dim, dtype=torch.float64), torch.full((self.dim,), math.inf, dtype=torch.float64)

    def moment(self, q: float) -> Optional[float]:
        if self.dim == 1:
            return math.gamma(q + 1) / self.rate**q
        return None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(rate={self.rate:g}, d={self.dim})"


class Pareto(DistributionSpec):
    r"""Pareto law with index :math:`\delta`, density :math:`\delta y^{-\delta - 1}` on :math:`[1, \infty)`"""

    def __init__(self, index: float, dim: int = 1) -> None:
        if not index > 0:
            raise ValueError(f"Pareto index must be positive, got {index}")
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.index = float(index)
        self.dim = int(dim)

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        u = torch.rand(count, self.dim, generator=generator, dtype=torch.float64)
        return (1.0 - u).pow(-1.0 / self.index)

    def bounding_box(self):
        return torch.ones(self.dim, dtype=torch.float64), torch.full((self.dim,), math.inf, dtype=torch.float64)

    def moment(self, q: float) -> Optional[float]:
        if self.dim == 1:
            return self.index / (self.index - q) if q < self.index else math.inf
        return None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(index={self.index:g}, d={self.dim})"


class Empirical(DistributionSpec):
    r"""Uniform law on a finite list of points (with repetitions allowed)

    A single point gives the Dirac mass at that point.
    """

    def __init__(self, points) -> None:
        points = torch.as_tensor(points, dtype=torch.float64)
        if points.dim() == 1:
            points = points[:, None]
        if points.dim() != 2 or len(points) < 1:
            raise ValueError("an empirical law needs at least one point")
        if not torch.isfinite(points).all():
            raise ValueError("empirical points must be finite")
        self.atoms = points
        self.dim = points.shape[1]

    def draw(self, count: int, generator: torch.Generator) -> torch.Tensor:
        idx = torch.randint(len(self.atoms), (count,), generator=generator)
        return self.atoms[idx]

    def bounding_box(self):
        return self.atoms.min(0).values, self.atoms.max(0).values

    def support_affine_dim(self) -> int:
        if len(self.atoms) == 1:
            return 0
        return int(torch.linalg.matrix_rank(self.atoms[1:] - self.atoms[:1], rtol=1e-10).item())

    def support_size(self) -> float:
        return len(torch.unique(self.atoms, dim=0))

    def moment(self, q: float) -> float:
        return self.atoms.norm(dim=1).pow(q).mean().item()

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(atoms={len(self.atoms)}, d={self.dim})"


def sample(dist: DistributionSpec, rng: RngStream, count: int) -> torch.Tensor:
    r"""Draw ``count`` i.i.d. points from ``dist``

    Draws come in full blocks of ``SHARD_SIZE``, block :math:`k` from ``rng.substream(k)``,
    so a smaller ``count`` gives a prefix of the same draws.

    Parameters
    ----------
    dist : `DistributionSpec`

    rng : `RngStream`
        the draws are a deterministic function of ``(rng.seed, rng.stream_id)``

    count : int
        number of draws, at least one

    Returns
    -------
    `torch.Tensor`
        tensor of shape :math:`(\mathrm{count}, d)`
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    count = int(count)
    blocks = [
        dist.draw(SHARD_SIZE, rng.substream(k).generator())[: count - start]
        for k, start in enumerate(range(0, count, SHARD_SIZE))
    ]
    return torch.cat(blocks)


def pareto_order_statistics(n: int, index: float, rng: RngStream) -> torch.Tensor:
    r"""Order statistics :math:`Y^{(n)}_1 \leq \dots \leq Y^{(n)}_n` of ``n`` i.i.d. Pareto(``index``) draws

    Parameters
    ----------
    n : int
        sample size, at least one

    index : float
        the Pareto index :math:`\delta > 0`

    rng : `RngStream`

    Returns
    -------
    `torch.Tensor`
        non-decreasing tensor of shape :math:`(n)` with values :math:`\geq 1`
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sample(Pareto(index), rng, n)[:, 0].sort().values
