import pytest

# acceptance outcomes keyed by criterion number, filled while the suite runs
ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "test_acceptance.py::test_c"
    if marker not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    number = int(name[len("test_c"):].split("_")[0])
    ACCEPTANCE[number] = (name, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, outcome = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {outcome}  {name}")
