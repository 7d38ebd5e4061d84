import re

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion and print it."""

    def record(key, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {key}: {detail}"
        ACCEPTANCE[key] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(re.match(r"\d+", k).group()), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
