import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lpgw.fw_solvers import LargeLambdaWarning
from lpgw.gmspace import GaugeKind, from_points

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_space(rng, n, d=2, kind=GaugeKind.SQUARED_EUCLIDEAN, total=1.0, uniform=False, name=""):
    pts = rng.random((n, d))
    mass = np.full(n, 1.0 / n) if uniform else rng.random(n) + 0.1
    mass = mass * (total / mass.sum())
    return from_points(pts, mass, kind, name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space_factory():
    return make_space


@pytest.fixture(autouse=True)
def _quiet_large_lambda():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LargeLambdaWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
