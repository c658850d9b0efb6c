import math

import torch


class RunningMoments:
    r"""Running mean and variance of a stream of batches

    Batches are merged by pooling their sums and sums of squared deviations.
    The mean is ``total / count``, so that pathwise ordered batches give ordered means.

    Examples
    --------
    >>> acc = RunningMoments()
    >>> acc.update(torch.tensor([1.0, 2.0]))
    >>> acc.update(torch.tensor([3.0]))
    >>> acc.mean
    2.0
    """

    def __init__(self) -> None:
        self.count = 0
        self.total = 0.0
        self.m2 = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count > 0 else 0.0

    @property
    def variance(self) -> float:
        r"""Unbiased sample variance"""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        r"""Sample standard deviation divided by :math:`\sqrt{\mathrm{count}}`"""
        if self.count < 2:
            return 0.0
        return math.sqrt(self.variance / self.count)

    def update(self, values: torch.Tensor) -> None:
        n_b = values.numel()
        if n_b == 0:
            return
        sum_b = values.sum().item()
        mean_b = sum_b / n_b
        m2_b = (values - mean_b).pow(2).sum().item()
        count = self.count + n_b
        delta = mean_b - self.mean
        self.m2 += m2_b + delta**2 * self.count * n_b / count
        self.total += sum_b
        self.count = count
