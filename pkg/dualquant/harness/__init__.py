from ._config import ConfigError, ExperimentConfig, parse_config, load_config
from ._io import load_grid_file, save_grid_file, format_rows, write_rows, write_echo
from ._experiments import (
    DegenerateInput,
    HypothesisViolation,
    RateScanRow,
    QdqBoundReport,
    RATE_SCAN_COLUMNS,
    COMPARISON_COLUMNS,
    PIERCE_COLUMNS,
    lattice_for,
    build_grid,
    run_rate_scan,
    fit_rate,
    qdq_bound,
    check_qdq_bound,
    run_check_qdq_bound,
    run_comparison,
    run_pierce_scan,
    run_distortion,
    run_optimize,
    run_zador_scan,
    fp_eval,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "load_grid_file",
    "save_grid_file",
    "format_rows",
    "write_rows",
    "write_echo",
    "DegenerateInput",
    "HypothesisViolation",
    "RateScanRow",
    "QdqBoundReport",
    "RATE_SCAN_COLUMNS",
    "COMPARISON_COLUMNS",
    "PIERCE_COLUMNS",
    "lattice_for",
    "build_grid",
    "run_rate_scan",
    "fit_rate",
    "qdq_bound",
    "check_qdq_bound",
    "run_check_qdq_bound",
    "run_comparison",
    "run_pierce_scan",
    "run_distortion",
    "run_optimize",
    "run_zador_scan",
    "fp_eval",
]
