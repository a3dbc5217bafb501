"""Shared pytest hooks: surface acceptance verdicts in the terminal summary."""

ACCEPTANCE_VERDICTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
