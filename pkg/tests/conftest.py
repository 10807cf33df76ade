import os

import pytest

os.environ.setdefault("ECHCAP_ENV", "testing")

from echcap.config import Config, TestingConfig
from echcap.models import Bidisk
from echcap.services.capacities import capacities_of
from echcap.services.geometry import sample_omega0
from echcap.services.packing import load_placement


@pytest.fixture(scope="session")
def config():
    return TestingConfig


@pytest.fixture(scope="module")
def omega0_8192():
    return sample_omega0(8192)


@pytest.fixture(scope="module")
def omega0_4096():
    return sample_omega0(4096)


@pytest.fixture(scope="module")
def bidisk_caps_200():
    return capacities_of(Bidisk(8192), 200)


@pytest.fixture
def certificate():
    return load_placement(Config.PACKING_CERTIFICATE)
