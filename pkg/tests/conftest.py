import pytest
from hypothesis import HealthCheck, settings

from cyclo.builders import counterexample_proof, tef_system

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def system():
    return tef_system()


@pytest.fixture(scope="session")
def counterex(system):
    return counterexample_proof(system)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
