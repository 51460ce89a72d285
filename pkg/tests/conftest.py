import json
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def oracles():
    return json.loads(Path(__file__).with_name("oracles.json").read_text())


# one (criterion, ok, seconds, detail) entry per acceptance test, printed after the run
ACCEPTANCE: list[tuple[int, str, bool, float, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name, ok, secs, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {name} ({secs:.1f} s) {detail}")
