"""Backend equivalence and reference-formula checks for the hot kernels.

Every function is exercised on both implementations with the same inputs;
where a cheap independent formula exists the outputs are also checked
against it.
"""

import numpy as np
import pytest

from pathset.geometry import Environment, Obstacle, Workspace
from pathset.kernels import numba_backend, numpy_backend

BACKENDS = [numpy_backend, numba_backend]
IDS = ["numpy", "numba"]


def _random_env(rng):
    boxes = []
    for i in range(3):
        x, y = rng.uniform(60, 500), rng.uniform(60, 340)
        w, h = rng.uniform(20, 80), rng.uniform(20, 80)
        boxes.append(Obstacle(i, [[x, y], [x + w, y], [x + w, y + h], [x, y + h]]))
    return Environment(Workspace(640.0, 480.0), boxes)


def _pt_seg_reference(p, a, b):
    """Independent point-segment distance via projection clamping."""
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-300), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def _pt_poly_reference(p, verts):
    """Distance to a convex polygon: 0 inside, else min edge distance."""
    n = len(verts)
    inside = True
    best = np.inf
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        ab, ap = b - a, p - a
        if ab[0] * ap[1] - ab[1] * ap[0] < 0:
            inside = False
        best = min(best, _pt_seg_reference(p, a, b))
    return 0.0 if inside else best


def test_point_clearance_matches_reference_and_backends():
    rng = np.random.default_rng(11)
    env = _random_env(rng)
    verts, offs = env.packed()
    for _ in range(200):
        p = rng.uniform((0, 0), (640, 480))
        vals = [bk.point_clearance(p[0], p[1], verts, offs, 640.0, 480.0)
                for bk in BACKENDS]
        assert vals[0] == pytest.approx(vals[1], abs=1e-9)
        border = min(p[0], p[1], 640.0 - p[0], 480.0 - p[1])
        ref = min([border] + [
            _pt_poly_reference(p, o.vertices) for o in env.obstacles
        ])
        inside_any = any(o.contains(p) for o in env.obstacles)
        if inside_any:
            assert vals[0] <= 0.0
        else:
            assert vals[0] == pytest.approx(ref, abs=1e-9)


def test_points_clearance_matches_scalar_loop():
    rng = np.random.default_rng(12)
    env = _random_env(rng)
    verts, offs = env.packed()
    pts = rng.uniform((0, 0), (640, 480), size=(64, 2))
    for bk in BACKENDS:
        batch = bk.points_clearance(pts, verts, offs, 640.0, 480.0)
        loop = [bk.point_clearance(x, y, verts, offs, 640.0, 480.0)
                for x, y in pts]
        np.testing.assert_allclose(batch, loop, atol=1e-12)


def test_segment_clearance_backends_agree():
    rng = np.random.default_rng(13)
    env = _random_env(rng)
    verts, offs = env.packed()
    a = rng.uniform((0, 0), (640, 480), size=(120, 2))
    b = rng.uniform((0, 0), (640, 480), size=(120, 2))
    out = [bk.segments_clearance(a, b, verts, offs) for bk in BACKENDS]
    np.testing.assert_allclose(out[0], out[1], atol=1e-9)
    for bk in BACKENDS:
        one = [bk.segment_clearance(*a[i], *b[i], verts, offs) for i in range(8)]
        np.testing.assert_allclose(one, bk.segments_clearance(a[:8], b[:8], verts, offs),
                                   atol=1e-12)


def test_segment_clearance_sign_for_crossing_segment():
    env = Environment(Workspace(640.0, 480.0),
                      [Obstacle(0, [[300, 200], [340, 200], [340, 280], [300, 280]])])
    verts, offs = env.packed()
    for bk in BACKENDS:
        crossing = bk.segment_clearance(200.0, 240.0, 400.0, 240.0, verts, offs)
        clear = bk.segment_clearance(200.0, 100.0, 400.0, 100.0, verts, offs)
        assert crossing < 0.0
        assert clear == pytest.approx(100.0, abs=1e-9)


def test_nearest_and_radius_indices_match_numpy_oracle():
    rng = np.random.default_rng(14)
    xs = rng.uniform(0, 640, 300)
    ys = rng.uniform(0, 480, 300)
    q = np.array([320.0, 240.0])
    d = np.hypot(xs - q[0], ys - q[1])
    for bk in BACKENDS:
        assert bk.nearest_index(xs, ys, 300, q[0], q[1]) == int(np.argmin(d))
        got = np.sort(np.asarray(bk.radius_indices(xs, ys, 300, q[0], q[1], 80.0)))
        want = np.flatnonzero(d <= 80.0)
        np.testing.assert_array_equal(got, want)


def test_edges_min_crossed_width_reference():
    """An edge through a passage reports that passage's width; one that stays
    clear reports infinity."""
    psegs = np.array([[300.0, 200.0, 300.0, 280.0]])   # vertical witness segment
    pwidths = np.array([80.0])
    a = np.array([[250.0, 240.0], [250.0, 100.0]])
    b = np.array([[350.0, 240.0], [350.0, 100.0]])
    for bk in BACKENDS:
        out = bk.edges_min_crossed_width(a, b, psegs, pwidths)
        assert out[0] == pytest.approx(80.0)
        assert np.isinf(out[1])


def test_body_obstacle_witness_backends_and_distance():
    rng = np.random.default_rng(15)
    env = _random_env(rng)
    verts, offs = env.packed()
    a = rng.uniform((0, 0), (640, 480), size=(40, 2))
    b = a + rng.normal(0, 30, size=(40, 2))
    for i in range(40):
        outs = [bk.body_obstacle_witness(a[i:i + 1], b[i:i + 1], verts, offs)
                for bk in BACKENDS]
        np.testing.assert_allclose(outs[0], outs[1], atol=1e-9)
        d, p, q = outs[0][0], outs[0][1:3], outs[0][3:5]
        if d > 0:
            # witness pair realizes the reported distance
            assert np.linalg.norm(p - q) == pytest.approx(d, abs=1e-9)


def test_relax_springs_backends_agree():
    env = Environment(Workspace(640.0, 480.0),
                      [Obstacle(0, [[300, 200], [340, 200], [340, 280], [300, 280]])])
    verts, offs = env.packed()
    n = 6
    base = np.column_stack([np.linspace(100, 200, n), np.full(n, 240.0)])
    base[2] += (3.0, -4.0)          # perturb so the relax has work to do
    si = np.arange(n - 1, dtype=np.int64)
    sj = si + 1
    rest = np.full(n - 1, 20.0)
    stiff = np.ones(n - 1)
    free = np.ones(n, dtype=np.bool_)
    free[0] = False
    results = []
    for bk in BACKENDS:
        pos = base.copy()
        bk.relax_springs(pos, si, sj, rest, stiff, free, 100, 0.4,
                         verts, offs, 640.0, 480.0)
        results.append(pos)
    np.testing.assert_allclose(results[0], results[1], atol=1e-9)
    assert np.array_equal(results[0][0], base[0])   # pinned node untouched
