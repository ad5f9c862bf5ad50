import pytest

from optocool.params import normalize
from optocool.sweep import FIG2_PARAMS, FIG3_PARAMS

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fig3():
    return normalize(FIG3_PARAMS)


@pytest.fixture
def fig2():
    return normalize(FIG2_PARAMS)


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(tag: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
