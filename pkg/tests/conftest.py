import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

SUITE_BUDGET_S = 60.0
_start = time.perf_counter()


def pytest_sessionstart(session):
    global _start
    _start = time.perf_counter()


def _elapsed() -> float:
    return time.perf_counter() - _start


def pytest_sessionfinish(session, exitstatus):
    # the runtime budget is part of the acceptance criteria, so blowing it fails the run
    if _elapsed() > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    test_acceptance = sys.modules.get("test_acceptance")
    if test_acceptance is None or not test_acceptance.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(test_acceptance.REPORT, key=test_acceptance.report_order):
        terminalreporter.write_line(line)
    t = _elapsed()
    verdict = "PASS" if t <= SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"criterion 10   {verdict}  whole suite runtime {t:.1f} s (< {SUITE_BUDGET_S:.0f} s)")
