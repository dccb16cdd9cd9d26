"""Shared test plumbing.

Collects one line per acceptance check so the end of the run shows a
compact pass/fail table with the measured values.
"""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(index: int, ok: bool, detail: str) -> None:
    line = f"criterion {index:2d} {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
