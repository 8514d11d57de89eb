import pytest

from kamprop.config import ExperimentConfig
from kamprop.experiments import cmd_fig1, cmd_fig2

_criteria = {}


@pytest.fixture(scope="session")
def fig1_run(tmp_path_factory):
    return cmd_fig1(ExperimentConfig().validate(), tmp_path_factory.mktemp("fig1"), svg=False)


@pytest.fixture(scope="session")
def fig2_run(tmp_path_factory):
    return cmd_fig2(ExperimentConfig().validate(), tmp_path_factory.mktemp("fig2"), svg=False)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.passed and _criteria.get(name, "PASS") == "PASS"
        _criteria[name] = "PASS" if ok else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        terminalreporter.write_line(f"{_criteria[name]}  {name}")
