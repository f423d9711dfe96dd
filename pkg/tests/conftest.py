import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent / "oracles"))

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def gap_gains():
    """Gains of the bound-gap scenario (c11=1, c12=0.81, c21=0.05, c22=0.5, cTT=10)."""
    from securecr.channel import ChannelGains
    return ChannelGains(1.0, 0.81, 0.05, 0.5, 10.0)
