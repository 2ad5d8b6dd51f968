"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""
import pytest

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "notes": []})
    if call.when == "call":
        failed = call.excinfo is not None
        if failed:
            entry["ok"] = False
        for key, value in item.user_properties:
            entry["notes"].append(f"{key}={value}")
    elif call.when == "setup" and call.excinfo is not None:
        entry["ok"] = False


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["ok"] else "FAIL"
        notes = ("  [" + ", ".join(entry["notes"]) + "]") if entry["notes"] else ""
        terminalreporter.write_line(f"criterion {number:2d} {status}: {entry['title']}{notes}")
