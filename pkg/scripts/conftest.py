"""Shared fixtures; puts src/ on the import path like the scripts do"""

import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from ansatz import build_ansatz  # noqa: E402
from hamiltonian import SpaceGrid, TransformConstants  # noqa: E402


@pytest.fixture
def table_path():
    return os.path.join(ROOT, "data", "table3_theta.csv")


@pytest.fixture
def consts():
    return TransformConstants(sigma=0.2, r=0.0, T=1.0)


@pytest.fixture
def european_grid():
    return SpaceGrid.european(50.0, 150.0, 4)


@pytest.fixture
def asian_grid():
    return SpaceGrid.asian(-0.5, 0.4, 4)


@pytest.fixture
def circuit():
    return build_ansatz(4, 3)


@pytest.fixture
def small_circuit():
    return build_ansatz(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
