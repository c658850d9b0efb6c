r"""Command line of the experiments

Exit codes: 0 success, 2 invalid configuration or input, 3 numerical failure, 4 failed check.
"""
import argparse
import logging
import sys
from typing import List, Optional

from dualquant.lp import NumericalFailure
from dualquant.optimize import Diverged

from ._config import ConfigError, ExperimentConfig, load_config
from ._experiments import (
    COMPARISON_COLUMNS,
    DISTORTION_COLUMNS,
    FP_EVAL_COLUMNS,
    OPTIMIZE_COLUMNS,
    PIERCE_COLUMNS,
    QDQ_COLUMNS,
    RATE_SCAN_COLUMNS,
    ZADOR_COLUMNS,
    fp_eval,
    run_check_qdq_bound,
    run_comparison,
    run_distortion,
    run_optimize,
    run_pierce_scan,
    run_rate_scan,
    run_zador_scan,
)
from ._io import load_grid_file, save_grid_file, write_echo, write_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK_FAILED = 4


def _config(args: argparse.Namespace, kind: str) -> ExperimentConfig:
    config = load_config(args.config, kind) if args.config else ExperimentConfig(kind=kind)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.out is not None:
        overrides["output"] = args.out
    config = config.replace(**overrides)
    logger.info("configuration %s", config.echo())
    return config


def _emit(config: ExperimentConfig, args: argparse.Namespace, rows, columns) -> None:
    write_rows(rows, columns, config.output, args.json, config.echo())
    if config.output is not None:
        write_echo(config.echo(), config.output)


def cmd_fp_eval(args: argparse.Namespace) -> int:
    config = _config(args, "fp-eval")
    if args.grid_file is None:
        raise ConfigError("fp-eval needs --grid-file")
    if args.site is None:
        raise ConfigError("fp-eval needs --site")
    try:
        site = [float(x) for x in args.site.split()]
    except ValueError as e:
        raise ConfigError(f"invalid --site {args.site!r}") from e
    grid = load_grid_file(args.grid_file)
    record = fp_eval(site, grid, config.p, config.norm, config.extended or args.extended)
    _emit(config, args, [record], FP_EVAL_COLUMNS)
    return EXIT_OK


def cmd_distortion(args: argparse.Namespace) -> int:
    config = _config(args, "distortion")
    _emit(config, args, run_distortion(config), DISTORTION_COLUMNS)
    return EXIT_OK


def cmd_rate_scan(args: argparse.Namespace) -> int:
    config = _config(args, "rate-scan")
    rows = run_rate_scan(config)
    _emit(config, args, [row.as_dict() for row in rows], RATE_SCAN_COLUMNS)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = _config(args, "compare")
    _emit(config, args, run_comparison(config), COMPARISON_COLUMNS)
    return EXIT_OK


def cmd_pierce_scan(args: argparse.Namespace) -> int:
    config = _config(args, "pierce-scan")
    _emit(config, args, run_pierce_scan(config), PIERCE_COLUMNS)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    config = _config(args, "optimize")
    rows, grids = run_optimize(config)
    _emit(config, args, rows, OPTIMIZE_COLUMNS)
    if args.grid_out is not None:
        for row, grid in zip(rows, grids):
            path = args.grid_out.format(n=row["n"])
            save_grid_file(grid, path, header=f"n={row['n']} p={config.p:g} seed={config.seed}")
    return EXIT_OK


def cmd_check_qdq_bound(args: argparse.Namespace) -> int:
    config = _config(args, "check-qdq-bound")
    _, report = run_check_qdq_bound(config)
    _emit(config, args, [report.as_dict()], QDQ_COLUMNS)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_zador_scan(args: argparse.Namespace) -> int:
    config = _config(args, "zador-scan")
    _emit(config, args, run_zador_scan(config), ZADOR_COLUMNS)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="experiment file (INI)")
    parser.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    parser.add_argument("--samples", type=int, default=None, help="Monte Carlo samples per row")
    parser.add_argument("--out", type=str, default=None, help="output file, standard output by default")
    parser.add_argument("--json", action="store_true", help="write a JSON array instead of CSV")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualquant", description="Dual quantization experiments")
    sub = parser.add_subparsers(dest="cmd", required=True)

    commands = [
        ("fp-eval", cmd_fp_eval, "local error at one site, with its certificate"),
        ("distortion", cmd_distortion, "Monte Carlo distortion of grids"),
        ("rate-scan", cmd_rate_scan, "distortion against the grid size"),
        ("compare", cmd_compare, "dual, extended and nearest neighbour distortions on paired draws"),
        ("pierce-scan", cmd_pierce_scan, "random quantization of heavy-tailed laws"),
        ("optimize", cmd_optimize, "optimize grids"),
        ("check-qdq-bound", cmd_check_qdq_bound, "compare a scan of the unit cube with the coefficient bound"),
        ("zador-scan", cmd_zador_scan, "cubewise grids of a union of cubes"),
    ]
    for name, func, help in commands:
        p = sub.add_parser(name, help=help)
        _add_common(p)
        p.set_defaults(func=func)
        if name == "fp-eval":
            p.add_argument("--site", type=str, default=None, help='coordinates, e.g. "0.25 0.5"')
            p.add_argument("--grid-file", type=str, default=None, help="one point per line, # comments")
            p.add_argument("--extended", action="store_true", help="nearest neighbour outside the hull")
        if name == "optimize":
            p.add_argument("--grid-out", type=str, default=None, help="where to save the grids, {n} is replaced")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"dualquant: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, Diverged) as e:
        print(f"dualquant: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"dualquant: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
