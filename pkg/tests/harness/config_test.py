import json

import pytest

from dualquant.core import Empirical, Gaussian, Pareto, UniformCube, UniformCubeUnion
from dualquant.harness import ConfigError, ExperimentConfig, load_config, parse_config

EXAMPLE = """
# a rate scan of the unit square
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
n = 9 25 49 81   # perfect squares
grid = lattice

[optimizer]
method = lloyd_like
iterations = 500
step_a = 0.5

[pierce]
eta = 1.5
functional = dual
"""


def test_example() -> None:
    config = parse_config(EXAMPLE)
    assert config.kind == "rate-scan"
    assert config.seed == 7
    assert config.samples == 100000
    assert config.workers == 2
    assert isinstance(config.distribution, UniformCube)
    assert config.distribution.dim == 2
    assert config.p == 2.0
    assert config.norm.r == 2.0
    assert config.n_values == (9, 25, 49, 81)
    assert config.grid_source == "lattice"
    assert config.optimizer.method == "lloyd_like"
    assert config.optimizer.iterations == 500
    assert config.optimizer.step_schedule == (0.5, 10.0)
    # the optimizer inherits the seed of the experiment
    assert config.optimizer.seed == 7
    assert config.eta == 1.5
    assert config.functional == "dual"


def test_defaults() -> None:
    config, defaults = parse_config(""), ExperimentConfig()
    assert (config.kind, config.p, config.n_values, config.samples, config.seed) == (
        defaults.kind,
        defaults.p,
        defaults.n_values,
        defaults.samples,
        defaults.seed,
    )
    assert repr(config.distribution) == repr(defaults.distribution)
    assert parse_config(EXAMPLE, kind="compare").kind == "compare"


@pytest.mark.parametrize(
    "text, cls",
    [
        ("[distribution]\nkind = gaussian\ndim = 3\n", Gaussian),
        ("[distribution]\nkind = pareto\nindex = 2.5\n", Pareto),
        ("[distribution]\nkind = uniform_cube_union\ncorners = 0 0; 2 0\nweights = 0.25 0.75\n", UniformCubeUnion),
        ("[distribution]\nkind = empirical\npoints = 0 1; 2 3; 4 5\n", Empirical),
        ("[distribution]\nkind = point_mass\npoint = 0.5 0.5\n", Empirical),
    ],
)
def test_distributions(text, cls) -> None:
    assert isinstance(parse_config(text).distribution, cls)


def test_empirical_points() -> None:
    dist = parse_config("[distribution]\nkind = empirical\npoints = 0 1; 2 3; 4 5\n").distribution
    assert dist.atoms.tolist() == [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]


@pytest.mark.parametrize(
    "text, section, field, line",
    [
        ("[quantization]\np = 2\nn = 3 x\n", "quantization", "n", 3),
        ("[quantization]\n\np = 0.5\n", "quantization", "p", 3),
        ("[quantization]\nsize = 3\n", "quantization", "size", 2),
        ("[experiment]\nkind = rate-scan\n[grid]\nn = 3\n", "grid", None, 3),
        ("[experiment]\nkind = scan\n", "experiment", "kind", 2),
        ("[distribution]\nkind = cauchy\n", "distribution", "kind", 2),
        ("[distribution]\nkind = pareto\n", "distribution", "index", 1),
        ("[distribution]\nkind = pareto\nindex = -1\n", "distribution", None, 1),
        ("[quantization]\ngrid = explicit-file\n", "quantization", "grid_file", 1),
        ("[quantization]\nextended = maybe\n", "quantization", "extended", 2),
        ("[pierce]\nfunctional = nearest\n", "pierce", "functional", 2),
        ("[optimizer]\niterations = 0\n", "optimizer", None, 1),
    ],
)
def test_errors(text, section, field, line) -> None:
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    e = info.value
    assert (e.section, e.field, e.line) == (section, field, line)
    assert str(e).startswith(f"line {line}, [{section}]")


def test_syntax_error() -> None:
    with pytest.raises(ConfigError) as info:
        parse_config("n = 3\n")
    assert info.value.line == 1


def test_load(tmp_path) -> None:
    path = tmp_path / "scan.ini"
    path.write_text(EXAMPLE)
    assert load_config(str(path)).echo() == parse_config(EXAMPLE).echo()
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))


def test_echo() -> None:
    config = parse_config(EXAMPLE)
    echo = json.loads(json.dumps(config.echo()))
    assert echo["n"] == [9, 25, 49, 81]
    assert echo["seed"] == 7
    assert echo["optimizer"]["iterations"] == 500
    assert config.replace(seed=3).echo()["seed"] == 3
