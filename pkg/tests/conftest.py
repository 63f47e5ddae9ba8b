import pytest
from hypothesis import HealthCheck, settings

from qlin.instance import instance_w1, instance_w2, save_instance

settings.register_profile("repo", deadline=None, derandomize=True, print_blob=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def w1():
    return instance_w1()


@pytest.fixture
def w2():
    return instance_w2()


@pytest.fixture
def w1_path(tmp_path):
    p = tmp_path / "w1.json"
    p.write_text(save_instance(instance_w1()))
    return p
