"""Shared fixtures: the acceptance-criteria report collector.

tests/test_acceptance.py records one entry per criterion; after the run
pytest prints a single PASS/FAIL line for each of the nine criteria so
the gate can be read at a glance without scrolling the test output.
"""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}

_EXPECTED = range(1, 10)


@pytest.fixture
def record_criterion():
    """Record (criterion number, passed, one-line detail) for the summary."""

    def _record(number: int, passed: bool, detail: str):
        _CRITERIA[number] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in _EXPECTED:
        if number in _CRITERIA:
            passed, detail = _CRITERIA[number]
            verdict = "PASS" if passed else "FAIL"
            tr.write_line(f"{verdict} criterion {number}: {detail}")
        else:
            tr.write_line(f"FAIL criterion {number}: no result recorded (test did not run)")
