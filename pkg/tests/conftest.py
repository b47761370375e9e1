from __future__ import annotations

import pytest

from triplewell.instanton import closed_form_profile, make_grid

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Register one acceptance line: record_criterion(name, passed, detail)."""

    def _record(name: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append((name, bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")


@pytest.fixture(scope="session")
def unit_profile():
    """Closed-form omega = 1 instanton on a wide, fine grid."""
    return closed_form_profile(1.0, grid=make_grid(20.0, 0.01))
