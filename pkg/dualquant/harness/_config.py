r"""Experiment configuration files

An experiment is described by an INI file::

    [experiment]
    kind = rate-scan
    seed = 7
    samples = 100000
    workers = 2

    [distribution]
    kind = uniform_cube
    corner = 0 0
    edge = 1

    [quantization]
    p = 2
    norm = l2
    n = 9 25 49 81
    grid = lattice

    [optimizer]
    method = sgd
    iterations = 500

    [pierce]
    eta = 1
    functional = envelope

Lists are whitespace separated, points of a list of points are separated by ``;``.
"""
import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

from dualquant.core import (
    DistributionSpec,
    Empirical,
    Exponential,
    Gaussian,
    NormSpec,
    Pareto,
    UniformCube,
    UniformCubeUnion,
)
from dualquant.optimize import OptimizerConfig
from dualquant.pierce import ERROR_FUNCTIONALS

EXPERIMENT_KINDS = (
    "fp-eval",
    "distortion",
    "rate-scan",
    "compare",
    "pierce-scan",
    "optimize",
    "check-qdq-bound",
    "zador-scan",
)
GRID_SOURCES = ("lattice", "optimized", "explicit-file", "cubewise")
DISTRIBUTIONS = ("uniform_cube", "uniform_cube_union", "gaussian", "exponential", "pareto", "empirical", "point_mass")

_KEYS = {
    "experiment": ("kind", "seed", "samples", "output", "workers"),
    "distribution": ("kind", "dim", "corner", "edge", "corners", "weights", "rate", "index", "points", "point"),
    "quantization": ("p", "norm", "n", "grid", "grid_file", "extended"),
    "optimizer": (
        "method",
        "iterations",
        "step_a",
        "step_b",
        "restarts",
        "samples_per_eval",
        "batch_size",
        "averaging",
        "reseed_after",
        "checkpoints",
        "mesh",
    ),
    "pierce": ("eta", "delta", "functional", "replicates"),
}

_REQUIRED = object()


class ConfigError(ValueError):
    r"""Invalid experiment configuration

    Attributes
    ----------
    section : str, optional

    field : str, optional

    line : int, optional
        line of the offending entry in the file
    """

    def __init__(self, message: str, section: Optional[str] = None, field: Optional[str] = None, line: Optional[int] = None):
        self.section = section
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {field}" if field is not None else ""))
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _floats(text: str):
    return tuple(float(x) for x in text.split())


def _ints(text: str):
    return tuple(int(x) for x in text.split())


def _points(text: str):
    return [list(_floats(row)) for row in text.split(";") if row.strip()]


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _line_numbers(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    lines = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = i
        elif section is not None:
            lines[(section, re.split(r"[=:]", s, maxsplit=1)[0].strip().lower())] = i
    return lines


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, lines) -> None:
        self.parser = parser
        self.lines = lines

    def error(self, message: str, section: str, key: Optional[str] = None) -> ConfigError:
        line = self.lines.get((section, key), self.lines.get((section, None)))
        return ConfigError(message, section, key, line)

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, cast: Callable[[str], Any] = str, default: Any = _REQUIRED) -> Any:
        if not self.has(section, key):
            if default is _REQUIRED:
                raise self.error("missing required field", section, key)
            return default
        raw = self.parser.get(section, key)
        try:
            return cast(raw)
        except (TypeError, ValueError) as e:
            raise self.error(f"invalid value {raw!r} ({e})", section, key) from e


@dataclass(frozen=True)
class ExperimentConfig:
    r"""A parsed experiment

    Attributes
    ----------
    kind : str
        one of ``EXPERIMENT_KINDS``

    distribution : `dualquant.core.DistributionSpec`

    p : float

    norm : `dualquant.core.NormSpec`

    n_values : tuple of int

    samples : int

    seed : int

    grid_source : {"lattice", "optimized", "explicit-file", "cubewise"}

    grid_file : str, optional

    extended : bool

    output : str, optional

    workers : int
        rows computed concurrently, the values do not depend on it
    """

    kind: str = "rate-scan"
    distribution: DistributionSpec = field(default_factory=lambda: UniformCube([0.0]))
    p: float = 2.0
    norm: NormSpec = field(default_factory=lambda: NormSpec("l2"))
    n_values: Tuple[int, ...] = (16,)
    samples: int = 2**16
    seed: int = 0
    grid_source: str = "lattice"
    grid_file: Optional[str] = None
    extended: bool = False
    output: Optional[str] = None
    workers: int = 1
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    eta: float = 1.0
    delta: Optional[float] = None
    functional: str = "envelope"
    replicates: int = 32

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}", "experiment", "kind")
        if self.grid_source not in GRID_SOURCES:
            raise ConfigError(f"grid must be one of {GRID_SOURCES}, got {self.grid_source!r}", "quantization", "grid")
        if self.grid_source == "explicit-file" and self.grid_file is None:
            raise ConfigError("grid = explicit-file needs grid_file", "quantization", "grid_file")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}", "experiment", "samples")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}", "experiment", "workers")
        if any(n < 1 for n in self.n_values) or len(self.n_values) == 0:
            raise ConfigError(f"n must be a non-empty list of positive integers, got {self.n_values}", "quantization", "n")
        if not self.p >= 1:
            raise ConfigError(f"p must be >= 1, got {self.p}", "quantization", "p")
        if self.functional not in ERROR_FUNCTIONALS:
            raise ConfigError(
                f"functional must be one of {ERROR_FUNCTIONALS}, got {self.functional!r}", "pierce", "functional"
            )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def echo(self) -> Dict[str, Any]:
        r"""Every field as a JSON-friendly value"""
        return dict(
            kind=self.kind,
            distribution=repr(self.distribution),
            p=self.p,
            norm=repr(self.norm),
            n=list(self.n_values),
            samples=self.samples,
            seed=self.seed,
            grid=self.grid_source,
            grid_file=self.grid_file,
            extended=self.extended,
            output=self.output,
            workers=self.workers,
            optimizer=dataclasses.asdict(self.optimizer),
            eta=self.eta,
            delta=self.delta,
            functional=self.functional,
            replicates=self.replicates,
        )


def _distribution(reader: _Reader) -> DistributionSpec:
    s = "distribution"
    kind = reader.get(s, "kind")
    dim = reader.get(s, "dim", int, None)
    try:
        if kind == "uniform_cube":
            corner = reader.get(s, "corner", _floats, None) or (0.0,) * (dim or 1)
            return UniformCube(corner, reader.get(s, "edge", float, 1.0))
        if kind == "uniform_cube_union":
            return UniformCubeUnion(
                reader.get(s, "corners", _points), reader.get(s, "edge", float, 1.0), reader.get(s, "weights", _floats, None)
            )
        if kind == "gaussian":
            return Gaussian(dim or 1)
        if kind == "exponential":
            return Exponential(reader.get(s, "rate", float, 1.0), dim or 1)
        if kind == "pareto":
            return Pareto(reader.get(s, "index", float), dim or 1)
        if kind == "empirical":
            return Empirical(reader.get(s, "points", _points))
        if kind == "point_mass":
            return Empirical([list(reader.get(s, "point", _floats))])
    except ConfigError:
        raise
    except ValueError as e:
        raise reader.error(str(e), s) from e
    raise reader.error(f"kind must be one of {DISTRIBUTIONS}, got {kind!r}", s, "kind")


def _optimizer(reader: _Reader, seed: int, extended: bool, samples: int) -> OptimizerConfig:
    s = "optimizer"
    defaults = OptimizerConfig()
    try:
        return OptimizerConfig(
            method=reader.get(s, "method", str, defaults.method),
            iterations=reader.get(s, "iterations", int, defaults.iterations),
            step_schedule=(
                reader.get(s, "step_a", float, defaults.step_schedule[0]),
                reader.get(s, "step_b", float, defaults.step_schedule[1]),
            ),
            restarts=reader.get(s, "restarts", int, defaults.restarts),
            samples_per_eval=reader.get(s, "samples_per_eval", int, min(samples, defaults.samples_per_eval)),
            seed=seed,
            extended=extended,
            batch_size=reader.get(s, "batch_size", int, None),
            averaging=reader.get(s, "averaging", float, defaults.averaging),
            reseed_after=reader.get(s, "reseed_after", int, defaults.reseed_after),
            checkpoints=reader.get(s, "checkpoints", int, defaults.checkpoints),
            mesh=reader.get(s, "mesh", int, defaults.mesh),
            final_samples=samples,
        )
    except ValueError as e:
        raise reader.error(str(e), s) from e


def parse_config(text: str, kind: Optional[str] = None) -> ExperimentConfig:
    r"""Parse the text of an experiment file

    Parameters
    ----------
    text : str

    kind : str, optional
        overrides ``[experiment] kind``

    Returns
    -------
    `ExperimentConfig`

    Raises
    ------
    `ConfigError`
        with the section, field and line of the first problem

    Examples
    --------
    >>> parse_config("[quantization]\nn = 3 5\n").n_values
    (3, 5)
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("entry outside of any section", line=e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError(f"cannot parse: {e.message.splitlines()[0]}", line=line) from e
    except configparser.Error as e:
        raise ConfigError(str(e).splitlines()[0], line=getattr(e, "lineno", None)) from e

    reader = _Reader(parser, _line_numbers(text))
    for section in parser.sections():
        if section not in _KEYS:
            raise reader.error(f"unknown section, expected one of {tuple(_KEYS)}", section)
        for key in parser.options(section):
            if key not in _KEYS[section]:
                raise reader.error("unknown field", section, key)

    defaults = ExperimentConfig()
    seed = reader.get("experiment", "seed", int, defaults.seed)
    samples = reader.get("experiment", "samples", int, defaults.samples)
    extended = reader.get("quantization", "extended", _bool, defaults.extended)
    norm = reader.get("quantization", "norm", NormSpec, defaults.norm)
    distribution = _distribution(reader) if parser.has_section("distribution") else defaults.distribution

    try:
        return ExperimentConfig(
            kind=kind or reader.get("experiment", "kind", str, defaults.kind),
            distribution=distribution,
            p=reader.get("quantization", "p", float, defaults.p),
            norm=norm,
            n_values=reader.get("quantization", "n", _ints, defaults.n_values),
            samples=samples,
            seed=seed,
            grid_source=reader.get("quantization", "grid", str, defaults.grid_source),
            grid_file=reader.get("quantization", "grid_file", str, None),
            extended=extended,
            output=reader.get("experiment", "output", str, None),
            workers=reader.get("experiment", "workers", int, defaults.workers),
            optimizer=_optimizer(reader, seed, extended, samples),
            eta=reader.get("pierce", "eta", float, defaults.eta),
            delta=reader.get("pierce", "delta", float, None),
            functional=reader.get("pierce", "functional", str, defaults.functional),
            replicates=reader.get("pierce", "replicates", int, defaults.replicates),
        )
    except ConfigError as e:
        if e.line is None and e.section is not None:
            raise reader.error(str(e).split(": ", 1)[-1], e.section, e.field) from e
        raise


def load_config(path: str, kind: Optional[str] = None) -> ExperimentConfig:
    r"""Read and parse an experiment file"""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from e
    return parse_config(text, kind)
