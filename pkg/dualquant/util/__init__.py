from ._running import RunningMoments


def prod(x):
    """Compute the product of a sequence."""
    out = 1
    for a in x:
        out *= a
    return out


def integer_root(n: int, d: int) -> int:
    r"""Compute :math:`\lfloor n^{1/d} \rfloor` exactly for nonnegative integers."""
    if n < 0 or d < 1:
        raise ValueError(f"integer_root needs n >= 0 and d >= 1, got n={n}, d={d}")
    r = int(round(n ** (1.0 / d)))
    while r > 0 and r**d > n:
        r -= 1
    while (r + 1) ** d <= n:
        r += 1
    return r


__all__ = [
    "RunningMoments",
    "prod",
    "integer_root",
]
