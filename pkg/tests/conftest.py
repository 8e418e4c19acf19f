import time

import pytest

SUITE_BUDGET_S = 600.0

_start = {}
_acceptance = []


def record(number, label, ok, detail):
    _acceptance.append((number, label, ok, detail))


def pytest_sessionstart(session):
    _start["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _start.get("t", time.perf_counter())
    if _acceptance:
        terminalreporter.section("acceptance criteria")
        for number, label, ok, detail in sorted(_acceptance):
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2} {label}: {detail}")
    status = "PASS" if elapsed <= SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(
        f"[{status}] suite runtime {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(12345)
