import csv
import io
import json
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch

from dualquant.core import Grid


def load_grid_file(path: str) -> Grid:
    r"""Read a grid file: one point per line, whitespace separated coordinates, ``#`` comments

    Raises
    ------
    ValueError
        if the file is empty, ragged or holds duplicate points
    """
    try:
        data = np.loadtxt(path, comments="#", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as e:
        raise ValueError(f"cannot read grid file {path}: {e}") from e
    if data.size == 0:
        raise ValueError(f"grid file {path} holds no point")
    return Grid(torch.from_numpy(data))


def save_grid_file(grid: Grid, path: str, header: str = "") -> None:
    np.savetxt(path, grid.points.numpy(), fmt="%.17g", header=header, comments="# ")


def _json_value(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def format_rows(
    rows: Sequence[Dict[str, Any]], columns: Sequence[str], as_json: bool = False, echo: Optional[Dict[str, Any]] = None
) -> str:
    r"""Rows as CSV with a header, or as a JSON array of objects

    Non-finite numbers are written ``nan``/``inf`` in CSV and ``null`` in JSON.
    With ``echo``, the configuration comes first: one ``# key = value`` line per field in CSV,
    or ``{"config": echo, "rows": [...]}`` in JSON.
    """
    if as_json:
        data: Any = [{c: _json_value(row[c]) for c in columns} for row in rows]
        if echo is not None:
            data = dict(config=echo, rows=data)
        return json.dumps(data, indent=2, default=str) + "\n"
    out = io.StringIO()
    for key, value in (echo or {}).items():
        out.write(f"# {key} = {json.dumps(value, default=str)}\n")
    writer = csv.DictWriter(out, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def write_rows(
    rows: List[Dict[str, Any]],
    columns: Sequence[str],
    out: Optional[str] = None,
    as_json: bool = False,
    echo: Optional[Dict[str, Any]] = None,
) -> None:
    r"""Write rows to ``out``, or to standard output with ``echo`` in front of them

    An output file gets its echo from `write_echo` instead.
    """
    text = format_rows(rows, columns, as_json, echo if out is None else None)
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="", encoding="utf-8") as f:
        f.write(text)


def write_echo(echo: Dict[str, Any], out: str) -> None:
    r"""Store the configuration next to an output file, as ``<out>.config.json``"""
    with open(f"{out}.config.json", "w", encoding="utf-8") as f:
        json.dump(echo, f, indent=2, default=str)
