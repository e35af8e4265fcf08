"""Collects acceptance outcomes and prints one verdict line per criterion."""

import pytest

_acceptance: dict[str, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    label, title = marker.args
    entry = _acceptance.setdefault(label, {"title": title, "ok": True})
    entry["ok"] &= report.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    key = lambda label: (int(label.rstrip("abcdefgh")), label)  # noqa: E731
    for label in sorted(_acceptance, key=key):
        entry = _acceptance[label]
        verdict = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"{verdict}  {label:<3} {entry['title']}")
