from typing import Iterator, Sequence, Union

import torch

import dualquant


def as_point(x, dim: int = None) -> torch.Tensor:
    r"""Convert ``x`` into a point of :math:`\mathbb{R}^d`

    Parameters
    ----------
    x : float or sequence of float or `torch.Tensor`
        coordinates, a scalar is a point of :math:`\mathbb{R}`

    dim : int, optional
        expected dimension

    Returns
    -------
    `torch.Tensor`
        float64 tensor of shape :math:`(d)`
    """
    point = torch.as_tensor(x, dtype=torch.float64).reshape(-1).clone()
    if point.numel() < 1:
        raise ValueError("a point needs at least one coordinate")
    if not torch.isfinite(point).all():
        raise ValueError(f"point coordinates must be finite, got {point.tolist()}")
    if dim is not None and point.numel() != dim:
        raise ValueError(f"expected a point of dimension {dim}, got dimension {point.numel()}")
    return point


def _duplicate_pairs(points: torch.Tensor, tol: float) -> torch.Tensor:
    scale = 1.0 + points.abs().max()
    dist = torch.cdist(points, points, p=float("inf"))
    dist.fill_diagonal_(float("inf"))
    return (dist < tol * scale).nonzero()


class Grid:
    r"""Finite quantizer :math:`\Gamma = \{x_1, \dots, x_n\} \subset \mathbb{R}^d`

    The points are stored, in order, as a float64 tensor of shape :math:`(n, d)`.
    Two points are duplicates when their :math:`\ell^\infty` distance is below
    ``duplicate * (1 + max |coordinate|)``, see `dualquant.get_tolerance_defaults`.

    Parameters
    ----------
    points : `torch.Tensor` or sequence
        tensor of shape :math:`(n, d)`, or of shape :math:`(n)` for a grid of the real line

    Examples
    --------
    >>> Grid([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    Grid(n=3, d=2)

    >>> Grid([0.0, 0.5, 1.0]).dim
    1
    """

    def __init__(self, points: Union[torch.Tensor, Sequence]) -> None:
        points = torch.as_tensor(points, dtype=torch.float64).clone()
        if points.dim() == 1:
            points = points[:, None]
        if points.dim() != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"a grid needs a tensor of shape (n, d) with n, d >= 1, got shape {tuple(points.shape)}")
        if not torch.isfinite(points).all():
            raise ValueError("grid coordinates must be finite")

        tol = dualquant.get_tolerance_defaults()["duplicate"]
        pairs = _duplicate_pairs(points, tol)
        if len(pairs) > 0:
            i, j = pairs[0].tolist()
            raise ValueError(f"grid points {i} and {j} are duplicates: {points[i].tolist()}")

        self._points = points

    @classmethod
    def from_points(cls, points, dedupe: bool = False) -> "Grid":
        r"""Build a grid, optionally dropping duplicates (first occurrence wins)"""
        points = torch.as_tensor(points, dtype=torch.float64)
        if points.dim() == 1:
            points = points[:, None]
        if dedupe:
            tol = dualquant.get_tolerance_defaults()["duplicate"]
            keep = torch.ones(len(points), dtype=torch.bool)
            for i, j in _duplicate_pairs(points, tol).tolist():
                if i < j and keep[i]:
                    keep[j] = False
            points = points[keep]
        return cls(points)

    @property
    def points(self) -> torch.Tensor:
        return self._points

    @property
    def size(self) -> int:
        return self._points.shape[0]

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def affine_dim(self) -> int:
        r"""Dimension of the affine hull of the points"""
        if self.size == 1:
            return 0
        centered = self._points[1:] - self._points[:1]
        return int(torch.linalg.matrix_rank(centered, rtol=1e-10).item())

    def is_full_dimensional(self) -> bool:
        return self.affine_dim() == self.dim

    def subgrid(self, indices) -> "Grid":
        return Grid(self._points[torch.as_tensor(indices, dtype=torch.long)])

    def union(self, other: "Grid") -> "Grid":
        r"""Grid containing the points of ``self`` followed by the new points of ``other``"""
        return Grid.from_points(torch.cat([self._points, other.points]), dedupe=True)

    def transform(self, shift, scale: float) -> "Grid":
        r"""Image :math:`\{a + \rho x_i\}` of the grid under a homothety"""
        return Grid(torch.as_tensor(shift, dtype=torch.float64) + scale * self._points)

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[torch.Tensor]:
        return iter(self._points)

    def __getitem__(self, i) -> torch.Tensor:
        return self._points[i]

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n={self.size}, d={self.dim})"
