import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

SUITE_BUDGET_S = 180.0
_RESULTS: dict[int, tuple[bool, str]] = {}
_START = time.perf_counter()


@pytest.fixture
def criterion():
    """record(number, passed, detail): one line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str):
        prev = _RESULTS.get(number)
        ok = bool(passed) and (prev is None or prev[0])
        text = detail if prev is None else f"{prev[1]}; {detail}"
        _RESULTS[number] = (ok, text)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    elapsed = time.perf_counter() - _START
    full = len(config.getoption("file_or_dir") or []) == 0 or any(
        a.rstrip("/").endswith("tests") for a in config.getoption("file_or_dir"))
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_RESULTS):
        ok, text = _RESULTS[k]
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}")
    ok10 = elapsed < SUITE_BUDGET_S
    scope = "full suite" if full else "selected tests only"
    tr.write_line(f"criterion 10: {'PASS' if ok10 else 'FAIL'}  {scope} wall time {elapsed:.1f} s "
                  f"(budget {SUITE_BUDGET_S:.0f} s, single process)")


def pytest_sessionfinish(session, exitstatus):
    if _RESULTS and time.perf_counter() - _START >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
