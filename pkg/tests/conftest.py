import pytest
from hypothesis import HealthCheck, settings

from mfmc.signals import Grid
from mfmc.transfer import DispersionParams

settings.register_profile("mfmc", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("mfmc")


@pytest.fixture
def grid():
    return Grid()


@pytest.fixture
def p():
    return DispersionParams.fixed()


ACCEPTANCE = []  # (number, title, ok, detail), filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {num}. {title}  ({detail})")
