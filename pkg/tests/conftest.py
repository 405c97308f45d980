import pytest

from fexp.gaussian import ChannelParams


@pytest.fixture
def ones():
    return ChannelParams(1.0, 1.0, 1.0, 1.0)
