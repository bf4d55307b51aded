import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from resopt.grid import StorageGrid
from resopt.synthetic import TOY_WEIGHTS, toy_series, toy_system


@pytest.fixture(scope="session")
def toy_spec():
    return toy_system()


@pytest.fixture(scope="session")
def toy_records():
    return toy_series(T=8)


@pytest.fixture(scope="session")
def toy_grid(toy_spec):
    return StorageGrid.uniform(toy_spec, 1000.0)  # 500..4500, m=5


@pytest.fixture(scope="session")
def toy_weights():
    return TOY_WEIGHTS
