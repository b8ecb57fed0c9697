import sys
from pathlib import Path

import pytest

from mapcsi.envmap import Aoi, EnvironmentMap, Material, Point2, Surface

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []

WALL_A = Surface(Point2(-50, 10), Point2(150, 10))
WALL_B = Surface(Point2(-50, -10), Point2(150, -10))
CANYON_WALLS = [((-50.0, 10.0), (150.0, 10.0)), ((-50.0, -10.0), (150.0, -10.0))]


@pytest.fixture
def canyon():
    return EnvironmentMap(Point2(0, 10), (WALL_A, WALL_B), Aoi(5, 95, -2, 2))


@pytest.fixture
def bus_canyon():
    bus = Surface(Point2(-5, 5), Point2(5, 5), Material.SEMI_TRANSPARENT)
    return EnvironmentMap(Point2(0, 10), (WALL_A, WALL_B, bus), Aoi(5, 95, -2, 2))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
