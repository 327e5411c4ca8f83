"""Collects one summary line per acceptance criterion and prints them at the end of the run."""
import re

ACCEPT_DETAILS: dict = {}
_outcomes: dict = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_(\d+)_", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        _outcomes[n] = "PASS" if report.passed and _outcomes.get(n) != "FAIL" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        terminalreporter.write_line(f"[ACCEPT {n:>2}] {_outcomes[n]}  {ACCEPT_DETAILS.get(n, '(no detail recorded)')}")
