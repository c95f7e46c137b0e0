import pytest
from hypothesis import HealthCheck, settings

from simnets import REF_POINT, korea_network

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def network():
    return korea_network()


@pytest.fixture
def ref_point():
    return REF_POINT
