import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mazelens.nn import NetworkSpec, init_random_weights


@pytest.fixture(scope="session")
def spec():
    return NetworkSpec()


@pytest.fixture(scope="session")
def weights(spec):
    return init_random_weights(spec, 0)


@pytest.fixture(scope="session")
def tiny_spec():
    # small ladder so whole-network brute-force oracles stay cheap
    return NetworkSpec(input_shape=(2, 6, 6), channels=(3, 4, 5), hidden=7)


@pytest.fixture(scope="session")
def tiny_weights(tiny_spec):
    return init_random_weights(tiny_spec, 11)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
