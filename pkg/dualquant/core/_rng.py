from dataclasses import dataclass

import torch

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    r"""Reproducible stream of random numbers

    A stream is a value: it is handed to workers, never shared by them.
    The same ``(seed, stream_id)`` reproduces the same draws, whatever the number of threads.

    Parameters
    ----------
    seed : int
        64-bit seed of the experiment

    stream_id : int
        64-bit identifier of the stream

    Examples
    --------
    >>> a = torch.rand(3, generator=RngStream(7).generator(), dtype=torch.float64)
    >>> b = torch.rand(3, generator=RngStream(7).generator(), dtype=torch.float64)
    >>> bool((a == b).all())
    True
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    @property
    def key(self) -> int:
        r"""64-bit key mixing ``seed`` and ``stream_id``"""
        return _splitmix64(self.seed ^ _splitmix64(self.stream_id ^ 0x632BE59BD9B4E019))

    def generator(self, device=None) -> torch.Generator:
        r"""Fresh `torch.Generator` positioned at the start of the stream"""
        gen = torch.Generator(device="cpu" if device is None else device)
        gen.manual_seed(self.key)
        return gen

    def substream(self, k: int) -> "RngStream":
        r"""Child stream number ``k``, deterministic in ``(seed, stream_id, k)``"""
        return RngStream(self.seed, _splitmix64(self.key ^ _splitmix64(k & _MASK64)))

    def spawn(self, count: int):
        r"""List of ``count`` child streams"""
        return [self.substream(k) for k in range(count)]
