from __future__ import annotations

import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance_record():
    """Record ``(criterion, passed, detail)``; lines are printed in the terminal summary."""

    def record(criterion: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE[criterion] = f"criterion {criterion}: {status} {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[key])
