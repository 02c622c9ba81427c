"""Prints one pass/fail line per acceptance criterion in the test summary."""

import pytest

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    report = outcome.get_result()
    if marker is None or not (report.when == "call" or report.failed):
        return
    key = tuple(marker.args)
    ok, detail = _outcomes.get(key, (True, ""))
    detail = dict(report.user_properties).get("detail", detail)
    _outcomes[key] = (ok and not report.failed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), (ok, detail) in sorted(_outcomes.items()):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
