"""Planar workspace model: convex obstacles, passage detection, clearance queries.

All lengths are in pixels.  Obstacles are convex polygons with CCW vertex
order; a passage is the minimum-distance witness segment between a pair of
obstacles, kept only when no third obstacle blocks it.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools

import numpy as np

from . import kernels
from .errors import InvalidEnvironment, InvalidObstacle


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangular workspace with its origin at (0, 0)."""

    width: float = 640.0
    height: float = 480.0

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


class Obstacle:
    """Convex polygon obstacle.

    Vertices are normalized to CCW order.  Degenerate input (fewer than three
    vertices, zero area, repeated points, concavity) raises InvalidObstacle.
    """

    def __init__(self, id: int, vertices):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidObstacle(f"obstacle {id}: need at least 3 planar vertices")
        if not np.isfinite(v).all():
            raise InvalidObstacle(f"obstacle {id}: non-finite vertex")
        area2 = float(
            np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        )
        if abs(area2) < 1e-9:
            raise InvalidObstacle(f"obstacle {id}: zero area")
        if area2 < 0.0:
            v = v[::-1].copy()
        edges = np.roll(v, -1, axis=0) - v
        if (np.hypot(edges[:, 0], edges[:, 1]) < 1e-12).any():
            raise InvalidObstacle(f"obstacle {id}: repeated consecutive vertices")
        turn = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(
            edges[:, 0], -1
        )
        if (turn < -1e-9).any():
            raise InvalidObstacle(f"obstacle {id}: polygon is not convex")
        self.id = int(id)
        self.vertices = v

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def contains(self, p, strict: bool = False) -> bool:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = (w[:, 0] - v[:, 0]) * (p[1] - v[:, 1]) - (w[:, 1] - v[:, 1]) * (
            p[0] - v[:, 0]
        )
        return bool((cr > 0).all()) if strict else bool((cr >= 0).all())


@dataclass(frozen=True)
class Passage:
    """Minimum-distance witness segment between two obstacles.

    ``segment[0]`` lies on the obstacle with id ``obstacles[0]``, row 1 on the
    other; ``width`` equals the segment length (the passage width).
    """

    obstacles: tuple[int, int]
    segment: np.ndarray
    width: float

    @property
    def direction(self) -> np.ndarray:
        d = self.segment[1] - self.segment[0]
        return d / np.linalg.norm(d)

    @property
    def normal(self) -> np.ndarray:
        u = self.direction
        return np.array([-u[1], u[0]])

    def coord(self, p) -> float:
        """Scalar position of p along the passage line; 0 and width at the ends."""
        return float(self.direction @ (np.asarray(p, dtype=float) - self.segment[0]))

    def point_at(self, s: float) -> np.ndarray:
        return self.segment[0] + s * self.direction

    def line_offset(self, p) -> float:
        """Signed distance of p from the passage line."""
        return float(self.normal @ (np.asarray(p, dtype=float) - self.segment[0]))


def _pt_seg_witness(p, a, b):
    ab = b - a
    l2 = float(ab @ ab)
    if l2 <= 0.0:
        return float(np.linalg.norm(p - a)), a.copy()
    t = float(np.clip((p - a) @ ab / l2, 0.0, 1.0))
    c = a + t * ab
    return float(np.linalg.norm(p - c)), c


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _seg_seg_witness(a, b, c, d):
    d1 = _cross2(b - a, c - a)
    d2 = _cross2(b - a, d - a)
    d3 = _cross2(d - c, a - c)
    d4 = _cross2(d - c, b - c)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        t = d1 / (d1 - d2)
        x = c + t * (d - c)
        return 0.0, x, x.copy()
    best = None
    for p, (u, v), swap in ((a, (c, d), False), (b, (c, d), False), (c, (a, b), True), (d, (a, b), True)):
        dist, w = _pt_seg_witness(p, u, v)
        if best is None or dist < best[0]:
            best = (dist, w, p) if swap else (dist, p, w)
    return best


def polygon_distance_witness(a: Obstacle, b: Obstacle):
    """Exact minimum distance between two convex polygons with witness points.

    Returns (distance, p_on_a, p_on_b); distance 0 when they touch or overlap.
    """
    for v in a.vertices:
        if b.contains(v):
            return 0.0, v.copy(), v.copy()
    for v in b.vertices:
        if a.contains(v):
            return 0.0, v.copy(), v.copy()
    va, wa = a.vertices, np.roll(a.vertices, -1, axis=0)
    vb, wb = b.vertices, np.roll(b.vertices, -1, axis=0)
    best = None
    for i in range(len(va)):
        for j in range(len(vb)):
            dist, p, q = _seg_seg_witness(va[i], wa[i], vb[j], wb[j])
            if best is None or dist < best[0]:
                best = (dist, p, q)
    return best


def min_distance(a, b) -> float:
    """Minimum Euclidean distance between points and/or obstacles (0 on contact)."""
    if isinstance(a, Obstacle) and isinstance(b, Obstacle):
        return polygon_distance_witness(a, b)[0]
    if isinstance(a, Obstacle):
        a, b = b, a
    pa = np.asarray(a, dtype=np.float64)
    if isinstance(b, Obstacle):
        if b.contains(pa):
            return 0.0
        v, w = b.vertices, np.roll(b.vertices, -1, axis=0)
        return min(_pt_seg_witness(pa, v[i], w[i])[0] for i in range(len(v)))
    return float(np.linalg.norm(pa - np.asarray(b, dtype=np.float64)))


def detect_passages(workspace: Workspace, obstacles) -> list[Passage]:
    """All valid passages among obstacle pairs.

    A pair forms a passage when its minimum-distance witness segment does not
    touch any third obstacle (the visibility condition); the passage width is
    the witness length.
    """
    out = []
    for a, b in itertools.combinations(obstacles, 2):
        dist, p, q = polygon_distance_witness(a, b)
        if dist <= 0.0:
            continue
        others = [o for o in obstacles if o.id not in (a.id, b.id)]
        if others:
            verts, offs = _pack(others)
            if kernels.segment_clearance(p[0], p[1], q[0], q[1], verts, offs) <= 0.0:
                continue
        out.append(
            Passage(
                obstacles=(a.id, b.id),
                segment=np.vstack([p, q]),
                width=dist,
            )
        )
    return out


def _pack(obstacles):
    if not obstacles:
        return np.zeros((0, 2)), np.zeros(1, dtype=np.int64)
    verts = np.ascontiguousarray(
        np.vstack([o.vertices for o in obstacles]), dtype=np.float64
    )
    offs = np.zeros(len(obstacles) + 1, dtype=np.int64)
    np.cumsum([len(o.vertices) for o in obstacles], out=offs[1:])
    return verts, offs


class Environment:
    """Workspace plus obstacles plus the derived passages, with fast queries."""

    def __init__(self, workspace: Workspace, obstacles=()):
        obstacles = list(obstacles)
        ids = [o.id for o in obstacles]
        if len(set(ids)) != len(ids):
            raise InvalidEnvironment("duplicate obstacle ids")
        for o in obstacles:
            if not all(workspace.contains(v) for v in o.vertices):
                raise InvalidEnvironment(f"obstacle {o.id} leaves the workspace")
        self.workspace = workspace
        self.obstacles = obstacles
        self._verts, self._offs = _pack(obstacles)
        self.passages = detect_passages(workspace, obstacles)
        if self.passages:
            self._psegs = np.ascontiguousarray(
                [np.concatenate([p.segment[0], p.segment[1]]) for p in self.passages],
                dtype=np.float64,
            )
            self._pwidths = np.array([p.width for p in self.passages])
        else:
            self._psegs = np.zeros((0, 4))
            self._pwidths = np.zeros(0)

    # -- point queries ------------------------------------------------------

    def clearance(self, p) -> float:
        """Distance to the nearest obstacle or workspace wall; 0 outside."""
        return kernels.point_clearance(
            float(p[0]), float(p[1]), self._verts, self._offs,
            self.workspace.width, self.workspace.height,
        )

    def points_clearance(self, pts) -> np.ndarray:
        pts = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, 2)
        return kernels.points_clearance(
            pts, self._verts, self._offs, self.workspace.width, self.workspace.height
        )

    def obstacle_distance(self, p) -> float:
        """Distance to the nearest obstacle only (inf when there are none)."""
        if not self.obstacles:
            return np.inf
        return min(min_distance(p, o) for o in self.obstacles)

    # -- segment queries ----------------------------------------------------

    def segment_clearance(self, a, b) -> float:
        """Min obstacle distance along segment ab; -1 when it penetrates one."""
        return kernels.segment_clearance(
            float(a[0]), float(a[1]), float(b[0]), float(b[1]),
            self._verts, self._offs,
        )

    def segments_clearance(self, a, b) -> np.ndarray:
        a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 2)
        b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 2)
        return kernels.segments_clearance(a, b, self._verts, self._offs)

    def _inset_ok(self, a, b, delta) -> bool:
        w, h = self.workspace.width, self.workspace.height
        for p in (a, b):
            if not (
                delta <= p[0] <= w - delta and delta <= p[1] <= h - delta
            ):
                return False
        return True

    def segment_free(self, a, b, delta: float = 0.0) -> bool:
        """True iff every point of segment ab keeps clearance >= delta."""
        if not self._inset_ok(a, b, delta):
            return False
        return self.segment_clearance(a, b) >= delta

    def segments_free(self, a, b, delta: float = 0.0) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
        b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
        w, h = self.workspace.width, self.workspace.height
        inset = (
            (a[:, 0] >= delta) & (a[:, 0] <= w - delta)
            & (a[:, 1] >= delta) & (a[:, 1] <= h - delta)
            & (b[:, 0] >= delta) & (b[:, 0] <= w - delta)
            & (b[:, 1] >= delta) & (b[:, 1] <= h - delta)
        )
        return inset & (self.segments_clearance(a, b) >= delta)

    def point_free(self, p, delta: float = 0.0) -> bool:
        """True iff p keeps clearance >= delta and lies in no obstacle."""
        if any(o.contains(p) for o in self.obstacles):
            return False
        return self.clearance(p) >= delta

    # -- ray query ----------------------------------------------------------

    def ray_free_length(self, origin, direction) -> float:
        """Length of the free segment from origin along direction.

        Stops at the first obstacle boundary or workspace wall; 0 when the
        origin already sits inside an obstacle.
        """
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        d = d / np.linalg.norm(d)
        w, h = self.workspace.width, self.workspace.height
        t_wall = np.inf
        for comp, lo, hi in ((0, 0.0, w), (1, 0.0, h)):
            if d[comp] > 1e-15:
                t_wall = min(t_wall, (hi - o[comp]) / d[comp])
            elif d[comp] < -1e-15:
                t_wall = min(t_wall, (lo - o[comp]) / d[comp])
        best = max(t_wall, 0.0)
        for obs in self.obstacles:
            v = obs.vertices
            ww = np.roll(v, -1, axis=0)
            edge = ww - v
            nrm = np.column_stack([edge[:, 1], -edge[:, 0]])  # outward for CCW
            denom = nrm @ d
            num = ((v - o) * nrm).sum(axis=1)
            t_in, t_out = -np.inf, np.inf
            feasible = True
            for k in range(len(v)):
                if abs(denom[k]) < 1e-15:
                    if num[k] < 0.0:
                        feasible = False
                        break
                    continue
                t = num[k] / denom[k]
                if denom[k] > 0:
                    t_out = min(t_out, t)
                else:
                    t_in = max(t_in, t)
            if not feasible or t_in > t_out or t_out < 0.0:
                continue
            best = min(best, max(t_in, 0.0))
        return float(best)

    # -- passage helpers ----------------------------------------------------

    def edges_min_crossed_width(self, a, b) -> np.ndarray:
        """Per edge, the smallest passage width crossed (inf when none)."""
        a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 2)
        b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 2)
        return kernels.edges_min_crossed_width(a, b, self._psegs, self._pwidths)

    def packed(self):
        return self._verts, self._offs
