import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed or name not in _criteria:
        _criteria[name] = "FAIL" if failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        number, _, title = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"{_criteria[name]}  {int(number):2d}  {title.replace('_', ' ')}")
