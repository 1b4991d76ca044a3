import math

import pytest
from hypothesis import HealthCheck, settings

from otbounds.potentials import DensityPair, Potential

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def cauchy_1d():
    """Standard Cauchy density 1/(pi(1+x^2)) as V^{-1}."""
    return Potential(1, "power", math.pi, 2.0)


@pytest.fixture
def cauchy_scaling_pair(cauchy_1d):
    target = Potential(1, "scaled-power", math.pi, 2.0, scale=2.0)
    return DensityPair(cauchy_1d, target, normalized=True)


# one pass/fail line per acceptance criterion at the end of the session
_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
        ok = report.outcome == "passed"
        _CRITERIA[number] = _CRITERIA.get(number, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if _CRITERIA[number] else 'FAIL'}")
