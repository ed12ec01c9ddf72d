import numpy as np
import pytest

from mmwlan.fingerprint import build_offline_db
from mmwlan.radio import RadioTables
from mmwlan.verify import make_verify_env


@pytest.fixture(scope="session")
def small_env():
    """3 APs x 8 sectors over a 6x5 LP grid in a 12 m x 9 m room."""
    return make_verify_env(lp_grid=(6, 5))


@pytest.fixture(scope="session")
def small_db(small_env):
    return build_offline_db(small_env)


@pytest.fixture(scope="session")
def small_tables(small_env):
    return RadioTables(small_env)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
