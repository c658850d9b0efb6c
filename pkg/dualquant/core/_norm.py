import math
from typing import Union

import torch


class NormSpec(tuple):
    r"""Norm :math:`\|\cdot\|_{\ell^r}` on :math:`\mathbb{R}^d`

    This class does not contain any data, it describes which norm is in force.
    It is used as argument by every function that measures a distance.

    Parameters
    ----------
    r : float or str or `NormSpec`
        the exponent :math:`r \geq 1`, ``float("inf")`` or one of the strings ``"l1"``, ``"l2"``, ``"l1.5"``, ``"linf"``

    Examples
    --------
    >>> NormSpec(2)
    l2

    >>> NormSpec("linf").r
    inf

    >>> NormSpec("l1.5")
    l1.5
    """

    def __new__(cls, r: Union[float, int, str, "NormSpec"] = 2.0):
        if isinstance(r, NormSpec):
            return r

        if isinstance(r, str):
            name = r.strip().lower()
            try:
                assert name.startswith("l")
                body = name[1:]
                r = math.inf if body in ("inf", "infinity", "_inf", "_infinity") else float(body.lstrip("_"))
            except Exception:
                raise ValueError(f'unable to convert string "{name}" into a NormSpec')
        elif isinstance(r, tuple):
            (r,) = r

        r = float(r)
        if math.isnan(r) or r < 1.0:
            raise ValueError(f"the exponent of an l_r norm must satisfy r >= 1, got {r}")
        return super().__new__(cls, (r,))

    @property
    def r(self) -> float:
        r"""The exponent :math:`r`, possibly ``inf``."""
        return self[0]

    @property
    def is_infinity(self) -> bool:
        return math.isinf(self.r)

    def __repr__(self) -> str:
        if self.is_infinity:
            return "linf"
        if self.r == int(self.r):
            return f"l{int(self.r)}"
        return f"l{self.r:g}"

    def __call__(self, v: torch.Tensor) -> torch.Tensor:
        return norm_eval(v, self)

    def gradient(self, v: torch.Tensor) -> torch.Tensor:
        r"""A (sub)gradient of :math:`v \mapsto \|v\|` at ``v``

        Zero vectors get the zero subgradient. For :math:`\ell^\infty` the first maximal coordinate is used.

        Parameters
        ----------
        v : `torch.Tensor`
            tensor of shape :math:`(..., d)`

        Returns
        -------
        `torch.Tensor`
            tensor of shape :math:`(..., d)`
        """
        norm = norm_eval(v, self)[..., None]
        safe = torch.where(norm > 0, norm, torch.ones_like(norm))
        if self.is_infinity:
            idx = v.abs().argmax(dim=-1, keepdim=True)
            grad = torch.zeros_like(v).scatter(-1, idx, v.gather(-1, idx).sign())
        elif self.r == 1.0:
            grad = v.sign()
        else:
            grad = v.sign() * (v.abs() / safe).pow(self.r - 1)
        return torch.where(norm > 0, grad, torch.zeros_like(grad))


def norm_eval(v: torch.Tensor, norm: NormSpec) -> torch.Tensor:
    r"""Evaluate :math:`\|v\|` along the last dimension

    Parameters
    ----------
    v : `torch.Tensor`
        tensor of shape :math:`(..., d)`, finite

    norm : `NormSpec` or str or float

    Returns
    -------
    `torch.Tensor`
        tensor of shape :math:`(...)`

    Examples
    --------
    >>> norm_eval(torch.tensor([3.0, 4.0]), "l2")
    tensor(5.)
    """
    norm = NormSpec(norm)
    return torch.linalg.vector_norm(v, ord=norm.r, dim=-1)
