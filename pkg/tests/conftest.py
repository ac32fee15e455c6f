import pytest

from src.firmware.ftl import FlashTranslationLayer
from src.firmware.hil import HostInterface
from src.firmware.pal import ParallelismLayer
from tests import helpers


@pytest.fixture
def small_config():
    return helpers.make_config()


@pytest.fixture
def pal(small_config):
    return ParallelismLayer(small_config.topology, small_config.timing)


@pytest.fixture
def ftl(small_config, pal):
    return FlashTranslationLayer(small_config.topology, small_config.firmware, pal)


@pytest.fixture
def hil(small_config, ftl):
    return HostInterface(small_config.firmware, ftl)


@pytest.fixture
def sectors_per_page(small_config):
    return small_config.topology.sectors_per_page
