import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

FIG3_LENGTHS = (20.0, 30.0, 15.0, 10.0)
FIG3_DEPARTURES = (5.0, 10.0, 20.0, 50.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig3():
    from transit_measure import make_timetable
    return make_timetable(FIG3_LENGTHS, 60.0, FIG3_DEPARTURES)


def dominating_pair(rng, n_max=8, lo=0.0, hi=60.0):
    """A random route set and a second one that it dominates."""
    base = rng.uniform(lo, hi, size=rng.integers(1, n_max))
    better = base - rng.choice([0.0, 0.0, 0.5, 3.0], size=len(base))
    extra = rng.uniform(lo, hi, size=rng.integers(0, 3))
    r = np.concatenate([better, extra])
    rng.shuffle(r)
    return r, base


def random_timetable(rng, n_max=8, ties=True):
    from transit_measure import make_timetable
    n = int(rng.integers(1, n_max + 1))
    T = float(rng.uniform(1.0, 120.0))
    lengths = rng.uniform(0.0, 60.0, size=n)
    theta = rng.uniform(0.0, T, size=n)
    if ties and n > 1 and rng.random() < 0.3:
        theta[rng.integers(0, n)] = theta[rng.integers(0, n)]
    return make_timetable(lengths, T, theta)



ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if call.excinfo is not None:
        ACCEPTANCE[number] = (title, "FAIL")
    elif call.when == "call":
        ACCEPTANCE[number] = (title, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, status = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")
