import numpy as np
import pytest
from hypothesis import settings

from lie2orbits.examples import BUILTIN_NAMES, builtin

settings.register_profile("repo", derandomize=True, max_examples=40, deadline=None)
settings.load_profile("repo")


@pytest.fixture(params=BUILTIN_NAMES)
def bundle(request):
    return builtin(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
