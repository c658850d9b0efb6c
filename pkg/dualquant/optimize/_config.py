from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from dualquant.core import Grid
from dualquant.dq import DistortionReport

METHODS = ("sgd", "lloyd_like", "exhaustive_1d")


@dataclass(frozen=True)
class OptimizerConfig:
    r"""Settings of `optimize_grid`

    Parameters
    ----------
    method : {"sgd", "lloyd_like", "exhaustive_1d"}
        ``sgd`` takes one gradient step per sample, ``lloyd_like`` averages the gradient over a mini-batch,
        ``exhaustive_1d`` solves the one-dimensional problem by dynamic programming on a mesh

    iterations : int
        number of gradient steps per restart

    step_schedule : tuple of float
        :math:`(a, b)`, the step of iteration :math:`t` is :math:`a / (b + t)`

    restarts : int
        number of independent runs

    samples_per_eval : int
        Monte Carlo samples of a checkpoint evaluation

    seed : int

    extended : bool
        optimize :math:`\bar d_{n,p}` instead of :math:`d_{n,p}`

    batch_size : int, optional
        samples per step, 1 for ``sgd`` and 64 for ``lloyd_like`` by default

    averaging : float
        fraction of the last iterates averaged into the final candidate

    reseed_after : int
        iterations without being supported after which a point is redrawn from the law

    checkpoints : int
        number of evaluations per restart

    mesh : int
        mesh size of ``exhaustive_1d``

    final_samples : int, optional
        Monte Carlo samples of the final report, ``samples_per_eval`` by default

    workers : int
        restarts run concurrently on this many threads, the result does not depend on it
    """

    method: str = "sgd"
    iterations: int = 1000
    step_schedule: Tuple[float, float] = (1.0, 10.0)
    restarts: int = 1
    samples_per_eval: int = 4096
    seed: int = 0
    extended: bool = False
    batch_size: Optional[int] = None
    averaging: float = 0.1
    reseed_after: int = 100
    checkpoints: int = 10
    mesh: int = 401
    final_samples: Optional[int] = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        a, b = self.step_schedule
        if not a > 0 or not b >= 1:
            raise ValueError(f"step schedule needs a > 0 and b >= 1, got {self.step_schedule}")
        if self.restarts < 1 or self.samples_per_eval < 1 or self.checkpoints < 1 or self.workers < 1:
            raise ValueError("restarts, samples_per_eval, checkpoints and workers must be >= 1")
        if not 0 <= self.averaging <= 1:
            raise ValueError(f"averaging must lie in [0, 1], got {self.averaging}")
        if self.mesh < 3:
            raise ValueError(f"mesh must be >= 3, got {self.mesh}")

    @property
    def effective_batch_size(self) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 64 if self.method == "lloyd_like" else 1

    def step(self, t: int) -> float:
        a, b = self.step_schedule
        return a / (b + t)


@dataclass
class OptimizationResult:
    r"""Output of `optimize_grid`

    Attributes
    ----------
    grid : `dualquant.core.Grid`
        the best grid found

    final_report : `dualquant.dq.DistortionReport`
        evaluation of ``grid`` on a stream distinct from the training streams

    trajectory : list of tuple
        ``(restart, iteration, estimate_p, running_best)`` at every checkpoint

    config : `OptimizerConfig`
    """

    grid: Grid
    final_report: DistortionReport
    trajectory: List[Tuple[int, int, float, float]] = field(default_factory=list)
    config: Optional[OptimizerConfig] = None
