import pytest

from phasefluct.fock import build_space


@pytest.fixture
def single_mode():
    return build_space(["pump"], [3])


@pytest.fixture
def pump23():
    return build_space(["pump"], [23])


@pytest.fixture
def fwm_space():
    return build_space(["pump", "stokes", "signal"], [23, 7, 7])


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
