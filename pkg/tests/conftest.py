"""Collects acceptance outcomes and prints one line per criterion at the end."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "notes": []})
    entry["passed"] &= report.passed
    entry["notes"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["notes"])
        line = f"[{status}] criterion {number}: {entry['title']}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
