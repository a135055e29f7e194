"""Shared pytest plumbing for the acceptance suite.

Acceptance tests report one PASS/FAIL/WARN line per criterion; the lines are
collected here and echoed in a dedicated section of the terminal summary so
they are visible regardless of output capturing.
"""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
