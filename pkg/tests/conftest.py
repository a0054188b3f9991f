"""Groups acceptance-test outcomes by criterion and prints one line per criterion."""

import pytest

_CRITERIA: dict[str, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": 0, "failed": []})
    if rep.when == "call" and rep.passed:
        entry["passed"] += 1
    elif rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "FAIL" if e["failed"] else "PASS"
        detail = f"  failed: {', '.join(e['failed'])}" if e["failed"] else f"  ({e['passed']} checks)"
        terminalreporter.write_line(f"{status}  criterion {number}: {e['title']}{detail}")
