import pytest

from flatband.decomp import enumerate_decompositions
from flatband.lattice import build_torus

_acceptance = []


@pytest.fixture(scope="session")
def t444():
    return build_torus((4, 4, 4))


@pytest.fixture(scope="session")
def decs444(t444):
    return list(enumerate_decompositions(t444))


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        label = {"passed": "PASS", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"{label}  {name}")
