import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orthoshadow import params as params_mod


@pytest.fixture(scope="session")
def mean_params():
    return params_mod.preset("mean")


@pytest.fixture(scope="session")
def sym_params():
    """Symmetric model: K = (e, e, e) gives beta = (2, 2, 2), u0 = 1/sqrt(3)."""
    return params_mod.params_from_k((np.e, np.e, np.e), label="sym")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
