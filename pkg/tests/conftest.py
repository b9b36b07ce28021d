import numpy as np
import pytest

from brownet.model import two_server_network
from brownet.policy import build_policy_tables, mode_reduction
from brownet.reduction import reduce_network

M_ROW = [[2.0, 1.0]]
PI = [1.0, 0.5]


@pytest.fixture(scope="session")
def data7():
    return two_server_network(v4=1.2)


@pytest.fixture(scope="session")
def red7(data7):
    red, _ = reduce_network(data7, M_override=M_ROW, pi_override=PI)
    return red


@pytest.fixture(scope="session")
def reduced7(data7):
    _, reduced = reduce_network(data7, M_override=M_ROW, pi_override=PI)
    return reduced


@pytest.fixture(scope="session")
def tables7(data7, red7, reduced7):
    # one QP per node; shared because it is the slowest fixture
    return build_policy_tables(data7, red7, reduced7)


@pytest.fixture(scope="session")
def mode7(red7):
    return mode_reduction(red7.G, red7.kappa)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
