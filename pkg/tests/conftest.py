import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nkgeom import modelspaces as ms

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cp3():
    return ms.build("cp3")


@pytest.fixture(scope="session")
def flag():
    return ms.build("flag")


@pytest.fixture(scope="session")
def s3s3():
    return ms.build("s3s3")


@pytest.fixture(scope="session")
def bundles(cp3, flag, s3s3):
    return {"cp3": cp3, "flag": flag, "s3s3": s3s3}


def e(n, i):
    """1-based basis vector."""
    return np.eye(n)[i - 1]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[i])
