"""Collects one pass/fail line per acceptance criterion and prints them at
the end of the run."""
import re

_RESULTS = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_(a\d+)_", report.nodeid)
    if not m:
        return
    key = m.group(1).upper()
    failed = report.failed
    if report.when == "call" or failed:
        _RESULTS[key] = _RESULTS.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: int(k[1:])):
        terminalreporter.write_line(f"{key}: {'PASS' if _RESULTS[key] else 'FAIL'}")
