import re

from hypothesis import settings

# first calls compile numba kernels; wall-clock deadlines would be flaky
settings.register_profile("asrmeso", deadline=None)
settings.load_profile("asrmeso")

_CRITERION = re.compile(r"test_criterion_(\d)")
_outcomes = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome == "failed":
        _outcomes.setdefault(int(m.group(1)), {})[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        res = _outcomes[n].values()
        failed = sum(r == "failed" for r in res)
        passed = sum(r == "passed" for r in res)
        status = "FAIL" if failed else ("PASS" if passed else "SKIP")
        terminalreporter.write_line(f"criterion {n}: {status} ({passed} passed, {failed} failed)")
