import pytest
import torch

from dualquant.util import test


@pytest.fixture(autouse=True)
def set_random_seed() -> None:
    """Set the random seeds to try to get some reproducibility"""
    test.set_random_seeds()


@pytest.fixture
def generator() -> torch.Generator:
    """A seeded generator for tests that draw random grids"""
    gen = torch.Generator()
    gen.manual_seed(0)
    return gen
