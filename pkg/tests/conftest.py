import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, ok, detail)`` for the end-of-run summary."""
    store = request.config._acceptance

    def record(criterion, ok, detail=""):
        prev = store.get(criterion)
        if prev is not None:
            ok = ok and prev[0]
            detail = f"{prev[1]}; {detail}" if prev[1] else detail
        store[criterion] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_acceptance", {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(store, key=lambda c: int(c.split()[0])):
        ok, detail = store[crit]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {crit}: {detail}")
