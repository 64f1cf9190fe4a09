"""Environment, obstacle, and passage-detection behavior."""

import numpy as np
import pytest

from pathset import Environment, Obstacle, Passage, Workspace, detect_passages
from pathset.errors import InvalidEnvironment, InvalidObstacle
from pathset.geometry import min_distance, polygon_distance_witness

from conftest import corridor_env


def test_workspace_contains_and_diagonal():
    ws = Workspace(640.0, 480.0)
    assert ws.contains((0, 0)) and ws.contains((640, 480))
    assert not ws.contains((-1, 10)) and not ws.contains((10, 481))
    assert ws.diagonal == pytest.approx(np.hypot(640, 480))


def test_obstacle_contains_and_centroid():
    box = Obstacle(0, [[10, 10], [30, 10], [30, 50], [10, 50]])
    np.testing.assert_allclose(box.centroid, [20, 30])
    assert box.contains((20, 30))
    assert box.contains((10, 10)) and not box.contains((10, 10), strict=True)
    assert not box.contains((31, 30))


def test_obstacle_rejects_degenerate_polygons():
    with pytest.raises(InvalidObstacle):
        Obstacle(0, [[0, 0], [1, 0]])
    with pytest.raises(InvalidObstacle):
        Obstacle(0, [[0, 0], [1, 0], [1, 1e-9]])


def test_polygon_distance_witness_matches_hand_geometry():
    a = Obstacle(0, [[0, 0], [10, 0], [10, 10], [0, 10]])
    b = Obstacle(1, [[25, 0], [35, 0], [35, 10], [25, 10]])
    d, p, q = polygon_distance_witness(a, b)
    assert d == pytest.approx(15.0)
    assert p[0] == pytest.approx(10.0) and q[0] == pytest.approx(25.0)
    d2, q2, p2 = polygon_distance_witness(b, a)
    assert d2 == pytest.approx(d)
    assert min_distance(a, b) == pytest.approx(15.0)


def test_detect_passages_widths_and_orientation():
    """Two boxes facing each other across a 60 px gap: one obstacle-obstacle
    passage of width 60 plus each box's passages to the workspace walls."""
    ws = Workspace(640.0, 480.0)
    a = Obstacle(0, [[200, 100], [240, 100], [240, 210], [200, 210]])
    b = Obstacle(1, [[200, 270], [240, 270], [240, 380], [200, 380]])
    passages = detect_passages(ws, [a, b])
    widths = sorted(round(p.width, 6) for p in passages)
    assert 60.0 in widths
    gap = [p for p in passages if p.width == pytest.approx(60.0)][0]
    # witness spans the facing edges
    ys = sorted((gap.segment[0][1], gap.segment[1][1]))
    assert ys[0] == pytest.approx(210.0) and ys[1] == pytest.approx(270.0)


def test_detect_passages_skips_overlapping_pairs():
    ws = Workspace(640.0, 480.0)
    a = Obstacle(0, [[100, 100], [200, 100], [200, 200], [100, 200]])
    b = Obstacle(1, [[150, 150], [260, 150], [260, 260], [150, 260]])  # overlaps a
    c = Obstacle(2, [[400, 100], [460, 100], [460, 200], [400, 200]])
    passages = detect_passages(ws, [a, b, c])
    for p in passages:
        assert p.width > 0.0


def test_passage_coordinate_frame():
    seg = np.array([[300.0, 200.0], [300.0, 280.0]])
    psg = Passage(obstacles=(0, 1), segment=seg, width=80.0)
    np.testing.assert_allclose(psg.direction, [0, 1])
    assert abs(psg.normal @ psg.direction) < 1e-12
    assert psg.coord((300, 240)) == pytest.approx(40.0)
    np.testing.assert_allclose(psg.point_at(40.0), [300, 240])
    assert abs(psg.line_offset((310, 240))) == pytest.approx(10.0)


def test_environment_validation():
    ws = Workspace(640.0, 480.0)
    box = [[10, 10], [40, 10], [40, 40], [10, 40]]
    with pytest.raises(InvalidEnvironment):
        Environment(ws, [Obstacle(0, box), Obstacle(0, np.add(box, 100))])
    with pytest.raises(InvalidEnvironment):
        Environment(ws, [Obstacle(0, [[-10, 10], [40, 10], [40, 40], [-10, 40]])])


def test_environment_allows_overlapping_obstacles():
    """Composite shapes are built from overlapping rectangles."""
    ws = Workspace(640.0, 480.0)
    a = Obstacle(0, [[100, 100], [200, 100], [200, 200], [100, 200]])
    b = Obstacle(1, [[180, 100], [280, 100], [280, 200], [180, 200]])
    env = Environment(ws, [a, b])
    assert env.clearance((150, 150)) <= 0.0


def test_clearance_and_segment_queries(one_box_env):
    env = one_box_env
    assert env.clearance((200, 240)) == pytest.approx(100.0)
    assert env.clearance((320, 240)) <= 0.0
    assert env.obstacle_distance((200, 240)) == pytest.approx(100.0)
    # workspace border defines clearance when closer than any obstacle
    assert env.clearance((5, 240)) == pytest.approx(5.0)
    assert env.segment_clearance((200, 240), (280, 240)) == pytest.approx(20.0)
    assert env.segment_clearance((200, 240), (400, 240)) < 0.0
    a = np.array([[200.0, 240.0], [200.0, 100.0]])
    b = np.array([[280.0, 240.0], [280.0, 100.0]])
    # nearest obstacle point to the second segment is the box corner (300, 200)
    np.testing.assert_allclose(env.segments_clearance(a, b),
                               [20.0, np.hypot(20.0, 100.0)])


def test_segment_free_with_inset(one_box_env):
    env = one_box_env
    assert env.segment_free((200, 100), (400, 100))
    assert not env.segment_free((200, 240), (400, 240))
    # 100 px above the box: free at delta below 100, not at delta above it
    assert env.segment_free((200, 100), (400, 100), delta=50.0)
    assert not env.segment_free((200, 100), (400, 100), delta=101.0)
    flags = env.segments_free(np.array([[200.0, 100.0], [200.0, 240.0]]),
                              np.array([[400.0, 100.0], [400.0, 240.0]]))
    assert flags.tolist() == [True, False]


def test_ray_free_length_in_corridor():
    env = corridor_env(50.0)
    # from the corridor center straight up/down to the walls
    up = env.ray_free_length((300, 245), (0, -1))
    down = env.ray_free_length((300, 245), (0, 1))
    assert up == pytest.approx(25.0, abs=1e-6)
    assert down == pytest.approx(25.0, abs=1e-6)
    # unobstructed ray runs to the workspace border
    assert env.ray_free_length((300, 100), (-1, 0)) == pytest.approx(300.0, abs=1e-6)


def test_point_free(one_box_env):
    assert one_box_env.point_free((200, 240))
    assert not one_box_env.point_free((320, 240))
    assert not one_box_env.point_free((200, 240), delta=150.0)
