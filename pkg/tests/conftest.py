import pytest
from hypothesis import HealthCheck, settings

from varswap.params import premium_example, reference_params

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def tp():
    """Reference forward-measure parameters."""
    return reference_params()


@pytest.fixture
def pp():
    """Physical parameters of the equity-premium study."""
    return premium_example()


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
