from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ENCLOSURES = {}


@pytest.fixture(scope="session")
def enclosure():
    """Example-1 enclosures keyed by h, built once per session."""
    from solvrank.ivp import example1_enclosure

    def get(h: Fraction):
        if h not in _ENCLOSURES:
            _ENCLOSURES[h] = example1_enclosure(h)
        return _ENCLOSURES[h]

    return get


_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    if rep.failed or rep.when == "call":
        _CRITERIA[n] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, verdict = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {verdict}: {title}")
