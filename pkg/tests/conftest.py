import os
import sys

import numpy as np
import pytest

# Ensure project root is importable
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

from treeharm.spectral import torus_grid
from treeharm.tree_core import TreeParams


@pytest.fixture
def params2():
    return TreeParams(2)


@pytest.fixture
def params3():
    return TreeParams(3)


@pytest.fixture
def grid512(params2):
    return torus_grid(512, params2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
