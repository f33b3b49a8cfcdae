import os

import pytest
from hypothesis import HealthCheck, settings

from selfsim import builtin
from selfsim._alloc import keep_heap

keep_heap()

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def tent():
    return builtin("tent")


@pytest.fixture(scope="session")
def cantor():
    return builtin("cantor")


@pytest.fixture(scope="session")
def sierpinski():
    return builtin("sierpinski")


@pytest.fixture(params=["tent", "cantor", "sierpinski"], scope="session")
def system(request):
    return builtin(request.param)
