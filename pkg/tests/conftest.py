import numpy as np
import pytest

from pushmpc import Nominal, default_mpc_config, default_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def mpc_config():
    return default_mpc_config()


@pytest.fixture(scope="session")
def line_nominal():
    return Nominal.line(0.05)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
