"""Shared fixtures.

The two default campaigns are expensive (a few seconds each), so they
run once per session and every test that needs calibrated statistics
reuses the same results. Timing is captured alongside so runtime
budgets can be asserted without re-running.
"""

import time

import pytest

from ionload import config as cfgmod
from ionload.campaign import run_campaign


@pytest.fixture(scope="session")
def rc():
    """Default run configuration (no file, no overrides)."""
    return cfgmod.load_config(None)


@pytest.fixture(scope="session")
def catalog(rc):
    return rc.catalog


def _timed_campaign(rc, name):
    campaign = rc.campaign(name)
    t0 = time.perf_counter()
    result = run_campaign(campaign)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def auto_campaign(rc):
    """(CampaignResult, elapsed_s) for the default autoionizing campaign."""
    return _timed_campaign(rc, cfgmod.SCHEME_AUTOIONIZING)


@pytest.fixture(scope="session")
def nonres_campaign(rc):
    """(CampaignResult, elapsed_s) for the default non-resonant campaign."""
    return _timed_campaign(rc, cfgmod.SCHEME_NONRESONANT)
