import csv
import json

import pytest

from dualquant.harness import load_grid_file
from dualquant.harness.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, main


def _write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _csv_rows(text: str):
    # skip the echoed configuration
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


def test_parser() -> None:
    args = build_parser().parse_args(["rate-scan", "--seed", "3", "--json"])
    assert args.seed == 3 and args.json
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_fp_eval(tmp_path, capsys) -> None:
    grid = _write(tmp_path, "grid.txt", "# the unit interval\n0\n1\n")
    assert main(["fp-eval", "--site", "0.25", "--grid-file", grid]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# kind = \"fp-eval\"\n")
    (row,) = _csv_rows(out)
    assert float(row["value_p"]) == pytest.approx(0.1875)
    assert row["branch"] == "interior"
    assert row["support"] == "0 1"


def test_fp_eval_exterior(tmp_path, capsys) -> None:
    grid = _write(tmp_path, "grid.txt", "0\n1\n")
    assert main(["fp-eval", "--site", "2", "--grid-file", grid]) == EXIT_CONFIG
    assert main(["fp-eval", "--site", "2", "--grid-file", grid, "--extended", "--json"]) == EXIT_OK
    (record,) = json.loads(capsys.readouterr().out)["rows"]
    assert record["branch"] == "exterior"
    assert record["nearest_index"] == 1
    assert record["value_p"] == pytest.approx(1.0)


def test_missing_input(tmp_path, capsys) -> None:
    assert main(["fp-eval", "--site", "0.5"]) == EXIT_CONFIG
    grid = _write(tmp_path, "grid.txt", "0\n1\n")
    assert main(["fp-eval", "--site", "x", "--grid-file", grid]) == EXIT_CONFIG
    assert main(["rate-scan", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_bad_config(tmp_path, capsys) -> None:
    config = _write(tmp_path, "bad.ini", "[quantization]\np = 0.5\n")
    assert main(["rate-scan", "--config", config]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2" in err and "[quantization]" in err


def test_diverged(tmp_path, capsys) -> None:
    text = """
[experiment]
samples = 256

[distribution]
kind = gaussian

[quantization]
n = 3
extended = true

[optimizer]
iterations = 10
checkpoints = 10
step_a = 1e8
step_b = 1
"""
    assert main(["optimize", "--config", _write(tmp_path, "diverge.ini", text)]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_check_qdq_bound(tmp_path, capsys) -> None:
    text = "[distribution]\nkind = uniform_cube\ncorner = 0 0\n\n[quantization]\nn = {n}\n"
    failing = _write(tmp_path, "coarse.ini", text.format(n="4"))
    assert main(["check-qdq-bound", "--config", failing, "--samples", "2000"]) == EXIT_CHECK_FAILED
    (row,) = _csv_rows(capsys.readouterr().out)
    assert row["passed"] == "False"

    passing = _write(tmp_path, "fine.ini", text.format(n="9 25 49 81"))
    assert main(["check-qdq-bound", "--config", passing, "--samples", "10000"]) == EXIT_OK


def test_output_file(tmp_path, capsys) -> None:
    config = _write(tmp_path, "scan.ini", "[experiment]\nseed = 4\n\n[quantization]\nn = 3 5 9\n")
    out = str(tmp_path / "scan.csv")
    assert main(["rate-scan", "--config", config, "--samples", "1000", "--out", out]) == EXIT_OK
    assert capsys.readouterr().out == ""
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert [int(r["n"]) for r in rows] == [3, 5, 9]
    assert all(r["seed"] == "4" for r in rows)
    with open(out + ".config.json") as f:
        echo = json.load(f)
    assert echo["samples"] == 1000
    assert echo["n"] == [3, 5, 9]
    assert echo["output"] == out


def test_same_seed_same_output(capsys) -> None:
    argv = ["compare", "--samples", "500", "--seed", "9", "--json"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    output = json.loads(first)
    assert output["config"]["seed"] == 9 and output["config"]["samples"] == 500
    (row,) = output["rows"]
    assert row["n"] == 16
    assert row["voronoi_estimate"] <= row["extended_estimate"]


def test_optimize_grid_out(tmp_path, capsys) -> None:
    config = _write(tmp_path, "opt.ini", "[quantization]\nn = 3 4\n\n[optimizer]\nmethod = exhaustive_1d\nmesh = 51\n")
    pattern = str(tmp_path / "grid_{n}.txt")
    assert main(["optimize", "--config", config, "--samples", "1000", "--grid-out", pattern]) == EXIT_OK
    rows = _csv_rows(capsys.readouterr().out)
    assert [r["method"] for r in rows] == ["exhaustive_1d"] * 2
    for n in (3, 4):
        grid = load_grid_file(pattern.format(n=n))
        assert len(grid) == n
        assert grid.points.min().item() == pytest.approx(0.0, abs=1e-6)
        assert grid.points.max().item() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(
    "cmd, text, column",
    [
        ("distortion", "[quantization]\nn = 11\n", "estimate_p"),
        (
            "pierce-scan",
            "[distribution]\nkind = exponential\n\n[quantization]\nn = 8 16\n\n[pierce]\nreplicates = 4\n",
            "error",
        ),
        ("zador-scan", "[distribution]\nkind = uniform_cube_union\ncorners = 0; 2\n\n[quantization]\nn = 8\n", "ratio"),
    ],
)
def test_other_commands(tmp_path, capsys, cmd, text, column) -> None:
    config = _write(tmp_path, "run.ini", text)
    assert main([cmd, "--config", config, "--samples", "2000"]) == EXIT_OK
    rows = _csv_rows(capsys.readouterr().out)
    assert len(rows) >= 1
    assert all(float(r[column]) >= 0 for r in rows)
