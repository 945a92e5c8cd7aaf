"""Shared test hooks: re-print the acceptance criterion verdict lines in the
terminal summary so they survive pytest's output capture."""

CRITERION_LINES = []


def record_criterion(line: str) -> None:
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=_criterion_number):
            terminalreporter.write_line(line)


def _criterion_number(line: str) -> int:
    try:
        return int(line.split(":", 1)[0].split()[-1])
    except (ValueError, IndexError):
        return 99
