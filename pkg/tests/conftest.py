"""Shared pytest config: prints one PASS/FAIL line per acceptance criterion
in the terminal summary (tests tagged @pytest.mark.acceptance)."""

import pytest

_results: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    if rep.when != "call":
        return
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, title = mark.args
    if hasattr(rep, "wasxfail"):
        outcome = ("FAIL (expected: unattainable as stated, "
                   "see notes in the test)" if rep.skipped else "UNEXPECTED PASS")
    elif rep.passed:
        outcome = "PASS"
    else:
        outcome = "FAIL"
    _results[str(num)] = (title, outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    def key(k):
        head = "".join(ch for ch in k if ch.isdigit())
        return (int(head) if head else 0, k)
    for num in sorted(_results, key=key):
        title, outcome = _results[num]
        terminalreporter.write_line(f"criterion {num}: {outcome} - {title}")
