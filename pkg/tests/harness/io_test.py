import csv
import io
import json
import math

import pytest
import torch

from dualquant.core import Grid
from dualquant.harness import format_rows, load_grid_file, save_grid_file, write_echo, write_rows


def test_grid_file(tmp_path) -> None:
    path = tmp_path / "grid.txt"
    path.write_text("# a triangle\n0 0\n1 0   # corner\n\n0 1\n")
    grid = load_grid_file(str(path))
    assert grid.points.tolist() == [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]

    one_d = tmp_path / "line.txt"
    one_d.write_text("0\n0.5\n1\n")
    assert load_grid_file(str(one_d)).points.shape == (3, 1)


@pytest.mark.parametrize("text", ["# nothing\n", "0 0\n1\n", "0 0\n0 0\n", "0 x\n"])
def test_invalid_grid_file(tmp_path, text) -> None:
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValueError):
        load_grid_file(str(path))


def test_save(tmp_path) -> None:
    grid = Grid(torch.tensor([[0.1, 0.2], [1 / 3, 2 / 3]], dtype=torch.float64))
    path = tmp_path / "saved.txt"
    save_grid_file(grid, str(path), header="n=2")
    assert path.read_text().startswith("# n=2")
    assert torch.equal(load_grid_file(str(path)).points, grid.points)


def test_format() -> None:
    rows = [dict(n=3, estimate=0.5, extra="x"), dict(n=5, estimate=math.nan, extra="y")]
    text = format_rows(rows, ("n", "estimate"))
    records = list(csv.DictReader(io.StringIO(text)))
    assert text.splitlines()[0] == "n,estimate"
    assert records[0] == {"n": "3", "estimate": "0.5"}
    assert records[1]["estimate"] == "nan"

    data = json.loads(format_rows(rows, ("n", "estimate"), as_json=True))
    assert data == [{"n": 3, "estimate": 0.5}, {"n": 5, "estimate": None}]


def test_write(tmp_path, capsys) -> None:
    rows = [dict(n=1, estimate=0.0)]
    write_rows(rows, ("n", "estimate"))
    assert capsys.readouterr().out == "n,estimate\n1,0.0\n"

    out = tmp_path / "rows.csv"
    write_rows(rows, ("n", "estimate"), str(out))
    assert out.read_text() == "n,estimate\n1,0.0\n"
    write_echo(dict(seed=3), str(out))
    assert json.loads((tmp_path / "rows.csv.config.json").read_text()) == {"seed": 3}


def test_echo_on_stdout(tmp_path, capsys) -> None:
    rows = [dict(n=1, estimate=0.0)]
    echo = dict(seed=3, norm="l2", n=[1, 2], grid_file=None)
    write_rows(rows, ("n", "estimate"), echo=echo)
    assert capsys.readouterr().out == (
        '# seed = 3\n# norm = "l2"\n# n = [1, 2]\n# grid_file = null\nn,estimate\n1,0.0\n'
    )

    write_rows(rows, ("n", "estimate"), as_json=True, echo=echo)
    data = json.loads(capsys.readouterr().out)
    assert data == {"config": echo, "rows": [{"n": 1, "estimate": 0.0}]}

    # a file keeps plain rows, its echo goes to the side file
    out = tmp_path / "rows.csv"
    write_rows(rows, ("n", "estimate"), str(out), echo=echo)
    assert out.read_text() == "n,estimate\n1,0.0\n"
