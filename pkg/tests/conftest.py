import pytest
from hypothesis import settings

from smcquad import QuadrotorParams

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture
def params():
    return QuadrotorParams()
