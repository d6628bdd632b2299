import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from Correlated.types import CminOptions
from QState.codec import save
from Quantifiers.types import SearchOptions
from Testbench.families import bell_state, schmidt_ket

settings.register_profile(
    "corrcoh",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("corrcoh")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def skewed():
    """Schmidt spectrum (0.9, 0.1)."""
    return schmidt_ket([0.9, 0.1])


@pytest.fixture
def fast_cmin():
    return CminOptions(restarts=4, max_iters=500, seed=7)


@pytest.fixture
def fast_search(fast_cmin):
    return SearchOptions(
        max_ancilla_dim=2, restarts=1, max_iters=200, seed=7, cmin=fast_cmin
    )


@pytest.fixture
def write_json(tmp_path):
    def _write(obj, name="state.json"):
        path_ = tmp_path / name
        save(obj, path_)
        return str(path_)

    return _write
