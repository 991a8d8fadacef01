"""Shared fixtures plus the acceptance-criteria summary hook.

Acceptance tests are named test_criterion_NN_*; after the run we print
one PASS/FAIL line per criterion so the gate can be read off the tail
of the pytest output.
"""

import re
from pathlib import Path

import pytest

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    num = m.group(1)
    if report.skipped:
        _CRITERIA.setdefault(num, "SKIP")
    elif report.when == "call":
        _CRITERIA[num] = "PASS" if report.passed else "FAIL"
    elif report.failed:
        # setup or teardown blew up; that still sinks the criterion
        _CRITERIA[num] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(f"CRITERION {num} {_CRITERIA[num]}")


@pytest.fixture(scope="session")
def data_dir():
    return Path(__file__).resolve().parent.parent / "data"
