import pytest

ACCEPTANCE_LINES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title, limit = marker.args
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_LINES[number] = f"[{status}] criterion {number:>2}: {title} ({report.duration:.2f} s, limit {limit} s)"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
