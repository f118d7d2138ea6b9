import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nidsi.exact import Grid, demo_dromion

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=[1.0, -1.0, 0.0], ids=["grow", "decay", "steady"])
def omega1(request):
    return request.param


@pytest.fixture
def generic_dromion(omega1):
    """All coefficients and spectral offsets nonzero, asymmetric weights."""
    return demo_dromion(omega1, alpha=0.5, beta=1.5, gamma=2.0, delta=3.0, kR0=0.8, lR0=1.3,
                        kI0=0.3, lI0=-0.2, omega0=0.1, a1=0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def square(L, N):
    return Grid.square(L, N)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
