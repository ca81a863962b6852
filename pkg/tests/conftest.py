"""Collects one summary line per acceptance criterion for the terminal report."""

import pytest

_LINES = []


@pytest.fixture
def criterion_note(request):
    def note(text: str) -> None:
        request.node.user_properties.append(("criterion_note", text))

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_criterion_" not in item.name:
        return
    number = int(item.name.split("test_criterion_")[1].split("_")[0])
    note = dict(item.user_properties).get("criterion_note", "")
    status = "PASS" if report.passed else "FAIL"
    line = f"criterion {number}: {status}"
    if note:
        line += f" ({note})"
    _LINES.append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
