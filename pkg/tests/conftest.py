import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_criteria: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        name = report.nodeid.split("::")[-1][len("test_criterion_"):]
        _criteria[name] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[0])):
        outcome, detail = _criteria[name]
        num, _, label = name.partition("_")
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num} ({label.replace('_', ' ')}): {status}"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)
