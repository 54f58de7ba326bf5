"""Shared pytest wiring for the acceptance verdict summary.

The acceptance tests register one PASS/FAIL line per criterion; replaying
them from pytest_terminal_summary keeps the lines out of per-test capture,
so every run log ends with the full verdict list.
"""

import contextlib

import pytest

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def criterion(request):
    """Context-manager factory: records '<name>: PASS|FAIL' for the summary."""
    lines = request.config.stash[_VERDICTS]

    @contextlib.contextmanager
    def guard(name):
        try:
            yield
        except BaseException:
            lines.append(f"{name}: FAIL")
            raise
        lines.append(f"{name}: PASS")

    return guard


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)
