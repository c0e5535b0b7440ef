import pytest

from hsakit import io as hio


@pytest.fixture(scope="session")
def table():
    return hio.read_parameter_table()


@pytest.fixture(scope="session")
def anchors():
    return hio.read_anchor_models()


@pytest.fixture(scope="session")
def closed4(table):
    return table["closed-4"]


@pytest.fixture(scope="session")
def hold_data():
    return hio.parse_hold_test(hio.bundled("relaxation_hold.csv"))


_criteria = {}
_titles = {}


def pytest_itemcollected(item):
    if item.name.startswith("test_criterion_"):
        _titles[item.name] = (item.function.__doc__ or "").strip()


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed:
        _criteria.setdefault(name, report.passed)
        if report.failed:
            _criteria[name] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.rsplit("_", 1)[1])):
        doc = _titles.get(name, "")
        verdict = "PASS" if _criteria[name] else "FAIL"
        terminalreporter.write_line(f"criterion {name.rsplit('_', 1)[1]}: {verdict}  {doc}")
