import pytest

from dualquant.core import Exponential, Gaussian, Pareto, RngStream, UniformCube
from dualquant.pierce import (
    MomentWarning,
    default_delta,
    one_sided_knots,
    pierce_scan_1d,
    pierce_scan_product,
    random_knots,
)


def test_knots() -> None:
    k = one_sided_knots(10, 2.0, 1.0, RngStream(0), scale=3.0)
    assert k.shape == (10,)
    assert k[0] == 0.0
    assert (k[1:] >= k[:-1]).all()

    k = random_knots(10, 2.0, 1.0, RngStream(0), (1.0, 2.0), two_sided=True)
    # 4 on each side of a shared 0
    assert k.shape == (9,)
    assert k[4] == 0.0
    assert (k[1:] >= k[:-1]).all()

    with pytest.raises(ValueError):
        one_sided_knots(1, 2.0, 1.0, RngStream(0))


def test_exponential_bounded() -> None:
    rows = pierce_scan_1d(Exponential(1.0), 2.0, 1.0, n_values=(16, 64, 256, 1024), samples=2**14, rng=RngStream(0))
    assert [r.n for r in rows] == [16, 64, 256, 1024]
    normalized = [r.normalized for r in rows]
    assert all(v > 0 for v in normalized)
    assert max(normalized) / min(normalized) <= 4


def test_bounded_support() -> None:
    rows = pierce_scan_1d(UniformCube([1.0], 1.5), 2.0, 1.0, n_values=(8, 32), samples=2**12, rng=RngStream(1))
    for r in rows:
        assert 0 < r.normalized < float("inf")
        assert r.normalized == pytest.approx(r.n * r.error_p_root)
        assert r.std_error >= 0


def test_scaling() -> None:
    kwargs = dict(n_values=(16, 64), samples=2**12, rng=RngStream(2), functional="dual")
    base = pierce_scan_1d(UniformCube([1.0], 1.5), 2.0, 1.0, **kwargs)
    scaled = pierce_scan_1d(UniformCube([3.0], 4.5), 2.0, 1.0, **kwargs)
    for a, b in zip(base, scaled):
        assert b.error_p_root == pytest.approx(3 * a.error_p_root, rel=1e-9)


def test_functionals_ordered() -> None:
    kwargs = dict(n_values=(32,), samples=2**12, rng=RngStream(3))
    rows = {f: pierce_scan_1d(Exponential(), 2.0, 1.0, functional=f, **kwargs)[0] for f in ("voronoi", "dual", "envelope")}
    assert rows["voronoi"].error_p_root <= rows["dual"].error_p_root <= rows["envelope"].error_p_root


def test_product_reduces() -> None:
    kwargs = dict(n_values=(16, 64), samples=2**12, rng=RngStream(4))
    assert pierce_scan_product(Exponential(), 2.0, 1.0, **kwargs) == pierce_scan_1d(Exponential(), 2.0, 1.0, **kwargs)


def test_gaussian_product() -> None:
    rows = pierce_scan_product(Gaussian(2), 2.0, 2.0, n_values=(64, 256, 1024), samples=2**13, rng=RngStream(5))
    # two-sided axes of 7, 15 and 31 knots
    assert [r.n for r in rows] == [49, 225, 961]
    normalized = [r.normalized for r in rows]
    assert max(normalized) / min(normalized) <= 4


def test_moment_warning() -> None:
    with pytest.warns(MomentWarning):
        pierce_scan_1d(Pareto(1.5), 2.0, 1.0, n_values=(8,), samples=256, rng=RngStream(0))


def test_invalid() -> None:
    assert default_delta(2.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        pierce_scan_1d(Exponential(), 2.0, 1.0, delta=2.5)
    with pytest.raises(ValueError):
        pierce_scan_1d(Exponential(), 2.0, 0.0)
    with pytest.raises(ValueError):
        pierce_scan_1d(Gaussian(2), 2.0, 1.0)
    with pytest.raises(ValueError):
        pierce_scan_1d(Exponential(), 2.0, 1.0, functional="nearest")
