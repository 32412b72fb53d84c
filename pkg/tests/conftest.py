import numpy as np
import pytest

from cohk.catalog import default_spaces

SEED = 0xC0FFEE


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(params=default_spaces(), ids=lambda s: s.space_id)
def space(request):
    return request.param
