from __future__ import annotations

import pytest

_RESULTS: list[tuple[str, bool, str]] = []


class CriterionReport:
    """Collects one pass/fail line per acceptance criterion."""

    def __call__(self, name: str, ok: bool, detail: str) -> bool:
        _RESULTS.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return bool(ok)


@pytest.fixture(scope="session")
def criterion() -> CriterionReport:
    return CriterionReport()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
