from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from refstore.syntax import parse_program

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

# Filled in by test_acceptance; printed once at the end of the session.
CRITERIA: dict[int, str] = {}


@pytest.fixture(scope="session")
def counters():
    return parse_program((CORPUS / "counter.ref").read_text())


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
