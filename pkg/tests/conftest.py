import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def _report(criterion: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def retry_once(fn, seeds=(20261016, 987654321)):
    """Run a statistical check up to twice with independent seeds.

    Returns the list of results; the check passes if any attempt passes.
    """
    results = []
    for seed in seeds:
        ok, value = fn(seed)
        results.append(value)
        if ok:
            return True, results
    return False, results
