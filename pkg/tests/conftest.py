"""Shared geometry fixtures for the test suite."""

import numpy as np
import pytest

from pathset import Environment, Obstacle, Workspace


@pytest.fixture
def empty_env():
    return Environment(Workspace(640.0, 480.0))


@pytest.fixture
def one_box_env():
    """A single 40x80 box in the middle of the workspace."""
    box = Obstacle(0, [[300, 200], [340, 200], [340, 280], [300, 280]])
    return Environment(Workspace(640.0, 480.0), [box])


def corridor_env(width: float, y0: float = 220.0) -> Environment:
    """Two long horizontal walls leaving a straight corridor of the given width."""
    top = Obstacle(0, [[100, y0 - 20], [500, y0 - 20], [500, y0], [100, y0]])
    bottom = Obstacle(1, [[100, y0 + width], [500, y0 + width],
                          [500, y0 + width + 20], [100, y0 + width + 20]])
    return Environment(Workspace(640.0, 480.0), [top, bottom])


def wall_with_hole_env(hole: float = 28.0) -> Environment:
    """A full-height vertical wall split by a centered hole."""
    half = (480.0 - hole) / 2.0
    top = Obstacle(0, [[300, 2], [340, 2], [340, half], [300, half]])
    bottom = Obstacle(1, [[300, half + hole], [340, half + hole],
                          [340, 478], [300, 478]])
    return Environment(Workspace(640.0, 480.0), [top, bottom])
