import math

import pytest

from dualquant.core import Empirical, Exponential, Grid, RngStream, UniformCube, UniformCubeUnion
from dualquant.dq import estimate_distortion
from dualquant.harness import (
    COMPARISON_COLUMNS,
    PIERCE_COLUMNS,
    RATE_SCAN_COLUMNS,
    DegenerateInput,
    ExperimentConfig,
    HypothesisViolation,
    RateScanRow,
    build_grid,
    check_qdq_bound,
    fit_rate,
    fp_eval,
    lattice_for,
    qdq_bound,
    run_check_qdq_bound,
    run_comparison,
    run_distortion,
    run_optimize,
    run_pierce_scan,
    run_rate_scan,
    run_zador_scan,
)
from dualquant.optimize import OptimizerConfig, regular_quantization_distortion
from dualquant.structured import ProductGrid, coefficient_ratio_1d, midpoint_knots, uniform_knots


def _grid_file(tmp_path, rows) -> str:
    path = tmp_path / "grid.txt"
    path.write_text("\n".join(" ".join(str(x) for x in row) for row in rows) + "\n")
    return str(path)


def test_lattice_for() -> None:
    assert lattice_for(UniformCube([0.0]), 5).knots.tolist() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    grid = lattice_for(UniformCube([0.0, 0.0]), 10)
    assert isinstance(grid, ProductGrid) and grid.size == 9
    assert lattice_for(Empirical([[0.3, 0.4]]), 1).points.tolist() == [[0.3, 0.4]]
    # a flat axis carries one knot
    assert lattice_for(Empirical([[0.0, 1.0], [1.0, 1.0]]), 4).shape == (2, 1)
    with pytest.raises(ValueError):
        lattice_for(UniformCube([0.0, 0.0]), 3)
    with pytest.raises(ValueError):
        lattice_for(Exponential(), 3)


def test_rate_scan_1d() -> None:
    config = ExperimentConfig(n_values=(3, 5, 9, 17), samples=10**5, seed=1)
    rows = run_rate_scan(config)
    assert [r.n for r in rows] == [3, 5, 9, 17]
    for r in rows:
        assert set(RATE_SCAN_COLUMNS) <= set(r.as_dict())
        assert not r.failed
        assert r.normalized / r.estimate == pytest.approx(r.n, rel=1e-12)
        expected = (2 / 12) ** 0.5 * r.n / (r.n - 1)
        assert abs(r.normalized - expected) <= 3 * r.n * r.std_error


def test_rate_fit_1d() -> None:
    rows = run_rate_scan(ExperimentConfig(n_values=(33, 65, 129, 257), samples=10**5))
    slope, _, r2 = fit_rate(rows)
    assert -1.05 <= slope <= -0.95
    assert r2 > 0.99


def test_rate_fit_2d() -> None:
    config = ExperimentConfig(distribution=UniformCube([0.0, 0.0]), n_values=(81, 289, 1089, 4225), samples=20000)
    slope, _, _ = fit_rate(run_rate_scan(config))
    assert abs(slope + 0.5) <= 0.05


def test_fit_rate() -> None:
    slope, intercept, r2 = fit_rate([(n, n**-1.0) for n in (2, 4, 8, 16)])
    assert slope == pytest.approx(-1.0, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    assert fit_rate([(n, 0.3) for n in (2, 4, 8)])[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegenerateInput):
        fit_rate([(2, 0.5), (4, 0.25)])
    with pytest.raises(DegenerateInput):
        fit_rate([(4, 0.5), (4, 0.25), (4, 0.3)])
    with pytest.raises(DegenerateInput):
        fit_rate([(2, 0.5), (4, 0.0), (8, math.nan)])


def test_point_mass_row() -> None:
    rows = run_rate_scan(ExperimentConfig(distribution=Empirical([[0.3]]), n_values=(1,), samples=100))
    assert rows[0].n == 1
    assert rows[0].estimate == 0.0


def test_failed_row(tmp_path) -> None:
    config = ExperimentConfig(grid_source="explicit-file", grid_file=_grid_file(tmp_path, [[0.2], [0.8]]), n_values=(7, 9))
    rows = run_rate_scan(config)
    # a grid file gives a single row, with the size of the grid
    assert len(rows) == 1
    assert rows[0].failed and rows[0].n == 2
    assert math.isnan(rows[0].estimate)


def test_workers() -> None:
    config = ExperimentConfig(distribution=UniformCube([0.0, 0.0]), n_values=(4, 9, 16, 25), samples=2000, seed=5)
    assert run_rate_scan(config) == run_rate_scan(config.replace(workers=3))


def test_qdq_bound() -> None:
    assert qdq_bound(2, 2, 2) == pytest.approx(1 / 3**0.5)
    assert qdq_bound(1, 1, 2) == pytest.approx((1 / 6) ** 0.5)

    config = ExperimentConfig(distribution=UniformCube([0.0, 0.0]), n_values=(9, 25, 49, 81), samples=10**4)
    rows, report = run_check_qdq_bound(config)
    assert len(rows) == 4
    assert report.bound == pytest.approx(0.5774, abs=1e-4)
    assert report.passed
    assert report.limit < min(r.normalized for r in rows)

    # a single coarse lattice stays above the bound
    _, coarse = run_check_qdq_bound(config.replace(n_values=(4,)))
    assert not coarse.passed
    assert math.isnan(coarse.limit)


def test_qdq_bound_invalid() -> None:
    row = RateScanRow(4, 2, 1.0, 0.5, 0.01, 1.0, "lattice", 0)
    with pytest.raises(HypothesisViolation):
        check_qdq_bound(2, 2.0, 1.0, [row])
    with pytest.raises(DegenerateInput):
        check_qdq_bound(2, 1.0, 1.0, [RateScanRow(4, 2, 1.0, math.nan, math.nan, math.nan, "lattice", 0, failed=True)])
    with pytest.raises(ValueError):
        run_check_qdq_bound(ExperimentConfig(distribution=Exponential()))


def test_comparison() -> None:
    config = ExperimentConfig(distribution=UniformCube([0.0, 0.0]), n_values=(4, 9), samples=500)
    rows = run_comparison(config)
    for row in rows:
        assert set(row) == set(COMPARISON_COLUMNS)
        assert row["voronoi_estimate"] <= row["extended_estimate"]
        assert row["extended_estimate"] == pytest.approx(row["dual_estimate"], rel=1e-9)


def test_comparison_escaping(tmp_path) -> None:
    grid_file = _grid_file(tmp_path, [[0.25], [0.5], [0.75]])
    config = ExperimentConfig(grid_source="explicit-file", grid_file=grid_file, samples=1000)
    row = run_comparison(config)[0]
    assert row["dual_estimate"] == math.inf
    assert row["voronoi_estimate"] <= row["extended_estimate"]


def test_point_mass_comparison() -> None:
    row = run_comparison(ExperimentConfig(distribution=Empirical([[0.5]]), n_values=(1,), samples=50))[0]
    assert row["dual_estimate"] == row["extended_estimate"] == row["voronoi_estimate"] == 0.0


def test_optimal_ratio() -> None:
    # optimal dual and nearest neighbour grids of the unit interval
    n, dist = 33, UniformCube([0.0])
    dual = estimate_distortion(dist, uniform_knots(n), 2, "l2", 10**5, RngStream(0))
    voronoi = regular_quantization_distortion(dist, midpoint_knots(n), 2, samples=10**5, rng=RngStream(0))
    assert dual.estimate / voronoi.estimate == pytest.approx(coefficient_ratio_1d(2), rel=0.05)


def test_pierce() -> None:
    config = ExperimentConfig(
        kind="pierce-scan", distribution=Exponential(), n_values=(16, 64), samples=2**12, eta=1.0, replicates=8
    )
    rows = run_pierce_scan(config)
    assert [r["n"] for r in rows] == [16, 64]
    assert all(set(r) == set(PIERCE_COLUMNS) for r in rows)
    assert all(r["normalized"] > 0 for r in rows)


def test_distortion() -> None:
    rows = run_distortion(ExperimentConfig(kind="distortion", n_values=(11,), samples=10**5))
    assert rows[0]["functional"] == "dual"
    assert abs(rows[0]["estimate_p"] - 1 / 600) <= 3 * rows[0]["std_error"]


def test_optimize() -> None:
    optimizer = OptimizerConfig(method="exhaustive_1d", mesh=101)
    config = ExperimentConfig(kind="optimize", n_values=(3, 5), samples=10**4, optimizer=optimizer, seed=2)
    rows, grids = run_optimize(config)
    assert [r["n"] for r in rows] == [3, 5]
    assert [len(g) for g in grids] == [3, 5]
    assert all(r["method"] == "exhaustive_1d" and r["seed"] == 2 for r in rows)


def test_build_grid(tmp_path) -> None:
    optimizer = OptimizerConfig(method="exhaustive_1d", mesh=51)
    grid = build_grid(ExperimentConfig(grid_source="optimized", optimizer=optimizer), 4)
    assert len(grid) == 4
    union = UniformCubeUnion([[0.0], [2.0]])
    assert len(build_grid(ExperimentConfig(distribution=union, grid_source="cubewise"), 8)) == 8
    with pytest.raises(ValueError):
        build_grid(ExperimentConfig(grid_source="cubewise"), 8)
    path = _grid_file(tmp_path, [[0.0], [1.0]])
    assert len(build_grid(ExperimentConfig(grid_source="explicit-file", grid_file=path), 99)) == 2


def test_zador() -> None:
    dist = UniformCubeUnion([[0.0], [2.0]], weights=[0.5, 0.5])
    rows = run_zador_scan(ExperimentConfig(kind="zador-scan", distribution=dist, n_values=(40,), samples=10**5))
    row = rows[0]
    assert row["n"] == 40
    assert row["density_norm"] == pytest.approx(2.0)
    # 20 regular knots in each cube
    assert row["ratio"] == pytest.approx((1 / 6) ** 0.5 * 20 / 19, rel=0.02)
    with pytest.raises(ValueError):
        run_zador_scan(ExperimentConfig(kind="zador-scan"))


def test_fp_eval() -> None:
    record = fp_eval([0.25], Grid([0.0, 1.0]), 2)
    assert record["branch"] == "interior"
    assert record["value_p"] == pytest.approx(0.1875)
    assert record["support"] == "0 1"
    assert record["nearest_index"] == -1

    record = fp_eval([2.0], Grid([0.0, 1.0]), 2, extended=True)
    assert record["branch"] == "exterior"
    assert record["nearest_index"] == 1
    assert math.isnan(record["min_reduced_cost"])
