"""Shared pytest wiring: the acceptance check summary block.

Acceptance tests register one line per shipped guarantee; the lines are
printed after the run so the verdicts are visible even when every test
passes (pytest would otherwise swallow the output).
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
