import math

import pytest

from bertrand.potentials import RadialProblem, hooke, kepler, power_law

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or report.failed:
        number, title = marker.args
        _, ok = _criteria.get(number, (title, True))
        _criteria[number] = (title, ok and not report.failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {title}")


@pytest.fixture
def kepler_problem():
    return RadialProblem(kepler())


@pytest.fixture
def hooke_problem():
    """U = r**2 with k = m = L = 1."""
    return RadialProblem(hooke())


@pytest.fixture
def hooke_fixture():
    """Normalized Hooke problem: x0 = 1, W'' = 4, W''' = -12, W'''' = 60."""
    return RadialProblem(power_law(2.0, k=0.5))


@pytest.fixture
def attractive_half():
    return RadialProblem(power_law(0.5, attractive=True))


PI = math.pi
