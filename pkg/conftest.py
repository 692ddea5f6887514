import pytest
from hypothesis import settings

from crib_reversal.materials import get_preset

settings.register_profile('default', deadline=None, max_examples=50)
settings.load_profile('default')


@pytest.fixture
def pr_preset():
    return get_preset('pr-yso')


@pytest.fixture
def er_preset():
    return get_preset('er-yso')


@pytest.fixture
def ideal_preset():
    return get_preset('ideal')


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / 'results'
    path.mkdir()
    return path
