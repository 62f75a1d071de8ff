import math
import random

import pytest

from dandelion.ingest import ClassroomMap, Track, TrackSample, Zone

ACCEPTANCE_FILE = "test_acceptance.py"
_acceptance: dict[str, str] = {}


def make_track(points, interval=2.0, t0=0.0, breaks=(), labels=None):
    """Uniform track from ``(x, y, heading)`` triples."""
    samples = []
    for i, (x, y, h) in enumerate(points):
        label = None if labels is None else labels[i]
        samples.append(TrackSample(t0 + i * interval, x, y, h, label))
    return Track(tuple(samples), interval=interval, segment_breaks=tuple(breaks))


def random_track(rng: random.Random, n, width=9.0, height=7.0, interval=2.0, step=1.0):
    """Bounded random walk with uniform headings."""
    x, y = rng.uniform(0, width), rng.uniform(0, height)
    pts = []
    for _ in range(n):
        x = min(max(x + rng.uniform(-step, step), 0.0), width)
        y = min(max(y + rng.uniform(-step, step), 0.0), height)
        pts.append((x, y, rng.uniform(0.0, 2 * math.pi)))
    return make_track(pts, interval)


@pytest.fixture
def room():
    zones = (
        Zone("left", ((0.0, 0.0), (5.0, 0.0), (5.0, 8.0), (0.0, 8.0))),
        Zone("right", ((5.0, 0.0), (10.0, 0.0), (10.0, 8.0), (5.0, 8.0))),
    )
    desk = ((2.0, 2.0), (3.0, 2.0), (3.0, 2.5), (2.0, 2.5))
    return ClassroomMap(10.0, 8.0, (desk,), zones)


@pytest.fixture
def empty_room():
    return ClassroomMap(10.0, 8.0, (), ())


def pytest_runtest_logreport(report):
    if ACCEPTANCE_FILE not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import CRITERIA, DETAILS

    terminalreporter.section("acceptance criteria")
    for name, title in CRITERIA:
        status = _acceptance.get(name, "NOT RUN")
        detail = f"  ({DETAILS[name]})" if name in DETAILS else ""
        terminalreporter.write_line(f"{status:7s} {title}{detail}")
