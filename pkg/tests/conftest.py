import re

import pytest

from restaurant_pomdp.config import (
    scenario_paper_3tables,
    scenario_small_1table,
    scenario_two_tables,
)

# Verdict lines recorded by tests/test_acceptance.py; printed in the terminal
# summary so they survive output capture.
ACCEPTANCE_REPORTS: list[str] = []
_ACCEPTANCE_FAILURES: list[str] = []


@pytest.fixture(scope="session")
def paper_cfg():
    return scenario_paper_3tables()


@pytest.fixture(scope="session")
def small_cfg():
    return scenario_small_1table()


@pytest.fixture(scope="session")
def two_cfg():
    return scenario_two_tables()


def pytest_runtest_logreport(report):
    if report.when != "call" or report.passed:
        return
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if match:
        num, name = int(match.group(1)), match.group(2).replace("_", " ")
        _ACCEPTANCE_FAILURES.append(f"ACCEPTANCE {num:02d} {name}: FAIL")


def pytest_terminal_summary(terminalreporter):
    lines = sorted(ACCEPTANCE_REPORTS + _ACCEPTANCE_FAILURES)
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
