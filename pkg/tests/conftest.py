import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config import SolverSettings  # noqa: E402
from reproduce import canonical_network, canonical_sequence  # noqa: E402


@pytest.fixture
def canonical_net():
    """r=1, L=0.1, delta=1e-3, c=1, two players."""
    return canonical_network()


@pytest.fixture
def net3():
    return canonical_network(3)


@pytest.fixture
def seq():
    """delta_m = 0.1**m, c_m = 2**m, L=0.1, r=1."""
    return canonical_sequence()


@pytest.fixture
def fast_settings():
    return SolverSettings(descent_starts=2)
