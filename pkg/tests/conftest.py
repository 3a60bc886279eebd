import pytest

from lagmachine import build_u15_2, compile_machine
from lagmachine.registry import build_inc
from support import ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def u15():
    return build_u15_2()


@pytest.fixture(scope="session")
def compiled_u15(u15):
    return compile_machine(u15)


@pytest.fixture(scope="session")
def inc():
    return build_inc()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
