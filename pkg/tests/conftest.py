from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from stereohedra.tessellation import initial_population

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def pop():
    return initial_population()


@pytest.fixture(scope="session")
def all_results():
    """Default full computation for the eight groups, shared across modules."""
    from stereohedra.bounds import compute_group
    from stereohedra.catalog import groups
    return [compute_group(G, keep_regions=False) for G in groups()]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
