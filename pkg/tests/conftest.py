"""Shared test infrastructure: uncaptured acceptance verdict reporting."""

import pytest

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Recorder for acceptance verdict lines, echoed after the run.

    Tests append one line per criterion; the terminal-summary hook prints
    them outside pytest's capture so every verdict is visible even when
    all tests pass.
    """
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
