"""Collects acceptance outcomes and prints one line per criterion at the end."""

from collections import defaultdict

import pytest

_results = defaultdict(list)
_titles = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    _titles[number] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = getattr(item, "criterion_detail", "")
        _results[number].append((report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        checks = _results[number]
        ok = all(passed for passed, _ in checks)
        details = "; ".join(d for _, d in checks if d)
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {_titles[number]}"
        terminalreporter.write_line(line + (f" ({details})" if details else ""))


@pytest.fixture
def record(request):
    """Attach a short measured summary to the criterion line."""
    def _record(text):
        previous = getattr(request.node, "criterion_detail", "")
        request.node.criterion_detail = f"{previous}, {text}" if previous else text
    return _record
