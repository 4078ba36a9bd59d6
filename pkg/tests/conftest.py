import pytest
from hypothesis import HealthCheck, settings

from orlicz_kit.field import BoxGrid

settings.register_profile("ci", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("ci")


@pytest.fixture
def unit33():
    return BoxGrid.parse("0:1:33,0:1:33")


@pytest.fixture
def unit65():
    return BoxGrid.parse("0:1:65,0:1:65")
