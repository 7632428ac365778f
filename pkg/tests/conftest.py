from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# (criterion number, label, passed, detail) filled by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def fixture_lines(*parts: str) -> list[str]:
    text = FIXTURES.joinpath(*parts).read_text(encoding="utf-8")
    return [ln for ln in text.splitlines() if ln.strip()]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num} [{status}] {label}" + (f" ({detail})" if detail else ""))


@pytest.fixture
def pickplace():
    from clin.world.families import pickplace as build

    return build()
