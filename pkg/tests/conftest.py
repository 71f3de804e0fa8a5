import sys
import pytest
from hypothesis import HealthCheck, settings

from odtd import optimizer
from odtd.params import ReceiverParams

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _monotone_scan_checks(monkeypatch):
    # every threshold scan in the test run double-checks the ratio ordering
    monkeypatch.setattr(optimizer, "check_scan_monotone", True)


@pytest.fixture
def defaults() -> ReceiverParams:
    return ReceiverParams()


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.RESULTS[n])
