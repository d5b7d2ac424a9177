import numpy as np
import pytest

from qpc.config import TOLERANCE_ENV_VAR, get_tolerances
from qpc.states import bell_state, horodecki_state, werner_state


@pytest.fixture(autouse=True)
def reset_tolerances(monkeypatch):
    # Tolerances are cached per process; every test starts from the defaults
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)
    get_tolerances.cache_clear()
    yield
    get_tolerances.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def bell_rho():
    return bell_state(2).density_matrix()


@pytest.fixture
def werner_08():
    return werner_state(0.8)


@pytest.fixture
def horodecki_half():
    return horodecki_state(0.5)
