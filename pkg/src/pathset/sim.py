"""Quasi-static deformable-body simulation.

The body is a node-spring mesh; a command displaces the grasped nodes and the
free nodes settle by damped Jacobi relaxation with obstacle projection.  The
observable state is the subset of nodes designated as feedback points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from . import kernels
from .errors import ScenarioError


@dataclass
class DeformableBody:
    nodes: np.ndarray          # (n, 2) rest positions
    springs: np.ndarray        # (m, 2) node index pairs
    rest: np.ndarray           # (m,) rest lengths
    stiffness: np.ndarray      # (m,)
    grasp: tuple[int, ...]     # robot-held nodes
    feedback: tuple[int, ...]  # observed nodes
    anchors: tuple[int, ...] = ()

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.float64).reshape(-1, 2)
        self.springs = np.asarray(self.springs, dtype=np.int64).reshape(-1, 2)
        self.rest = np.asarray(self.rest, dtype=np.float64)
        self.stiffness = np.asarray(self.stiffness, dtype=np.float64)
        held = set(self.grasp) | set(self.anchors)
        if set(self.feedback) - set(range(len(self.nodes))):
            raise ScenarioError("feedback indices out of range")
        if held - set(range(len(self.nodes))):
            raise ScenarioError("grasp/anchor indices out of range")


def _spring_arrays(pairs, nodes, stiffness):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    rest = np.linalg.norm(nodes[pairs[:, 0]] - nodes[pairs[:, 1]], axis=1)
    stiff = np.full(len(pairs), float(stiffness))
    return pairs, rest, stiff


def polyline_body(nodes, grasp="ends", feedback: Sequence[int] | None = None,
                  stiffness: float = 1.0, bend_stiffness: float = 0.3,
                  anchors: Sequence[int] = ()) -> DeformableBody:
    """Chain along the given nodes with structural and second-neighbour springs."""
    nodes = np.asarray(nodes, dtype=np.float64).reshape(-1, 2)
    n_nodes = len(nodes)
    pairs = [(i, i + 1) for i in range(n_nodes - 1)]
    pairs += [(i, i + 2) for i in range(n_nodes - 2)]
    pairs = np.asarray(pairs, dtype=np.int64)
    rest = np.linalg.norm(nodes[pairs[:, 0]] - nodes[pairs[:, 1]], axis=1)
    stiff = np.concatenate([
        np.full(n_nodes - 1, stiffness),
        np.full(n_nodes - 2, stiffness * bend_stiffness),
    ])
    if grasp == "ends":
        grasp_idx: tuple[int, ...] = (0, n_nodes - 1)
    elif grasp == "start":
        grasp_idx = (0,)
    else:
        grasp_idx = tuple(int(g) for g in grasp)
    if feedback is None:
        feedback = (0, n_nodes // 2, n_nodes - 1)
    return DeformableBody(nodes, pairs, rest, stiff, grasp_idx,
                          tuple(int(f) for f in feedback),
                          tuple(int(a) for a in anchors))


def chain_body(start, end, n_nodes: int, grasp="ends",
               feedback: Sequence[int] | None = None,
               stiffness: float = 1.0, bend_stiffness: float = 0.3) -> DeformableBody:
    """Straight chain of nodes with structural and second-neighbour springs."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    ts = np.linspace(0.0, 1.0, n_nodes)
    nodes = start[None, :] + ts[:, None] * (end - start)[None, :]
    return polyline_body(nodes, grasp, feedback, stiffness, bend_stiffness)


def grid_body(origin, size, shape, grasp, feedback,
              stiffness: float = 1.0, shear_stiffness: float = 0.5) -> DeformableBody:
    """Rectangular node grid with structural and shear springs."""
    nx, ny = shape
    w, h = size
    origin = np.asarray(origin, dtype=np.float64)
    xs = np.linspace(0.0, w, nx)
    ys = np.linspace(0.0, h, ny)
    nodes = np.array([[origin[0] + x, origin[1] + y] for y in ys for x in xs])

    def idx(ix, iy):
        return iy * nx + ix

    struct, shear = [], []
    for iy in range(ny):
        for ix in range(nx):
            if ix + 1 < nx:
                struct.append((idx(ix, iy), idx(ix + 1, iy)))
            if iy + 1 < ny:
                struct.append((idx(ix, iy), idx(ix, iy + 1)))
            if ix + 1 < nx and iy + 1 < ny:
                shear.append((idx(ix, iy), idx(ix + 1, iy + 1)))
                shear.append((idx(ix + 1, iy), idx(ix, iy + 1)))
    pairs = np.asarray(struct + shear, dtype=np.int64)
    rest = np.linalg.norm(nodes[pairs[:, 0]] - nodes[pairs[:, 1]], axis=1)
    stiff = np.concatenate([
        np.full(len(struct), stiffness),
        np.full(len(shear), stiffness * shear_stiffness),
    ])
    return DeformableBody(nodes, pairs, rest, stiff,
                          tuple(int(g) for g in grasp),
                          tuple(int(f) for f in feedback))


@dataclass
class BodyWitness:
    distance: float
    body_point: np.ndarray
    obstacle_point: np.ndarray
    feedback_index: int        # ordinal into the feedback tuple


class SpringPlant:
    """Deformable body in an obstacle environment under grasp control."""

    def __init__(self, body: DeformableBody, env, relax_iters: int = 150,
                 damping: float = 0.5):
        self.body = body
        self.env = env
        # gradient descent on the spring energy diverges when the step exceeds
        # the stability bound of the stiffest node; cap the damping there and
        # stretch the iteration count to keep the same total relaxation
        incident = np.zeros(len(body.nodes))
        for (i, j), k in zip(body.springs, body.stiffness):
            incident[i] += k
            incident[j] += k
        stable = 0.9 / max(float(incident.max()), 1e-9)
        self.damping = min(float(damping), stable)
        self.relax_iters = int(np.ceil(relax_iters * damping / self.damping))
        self.pos = body.nodes.copy()
        self._free = np.ones(len(self.pos), dtype=np.bool_)
        for i in body.grasp:
            self._free[i] = False
        for i in body.anchors:
            self._free[i] = False
        self._verts, self._offs = env.packed()
        n = len(self.pos)
        w = csr_matrix(
            (body.rest, (body.springs[:, 0], body.springs[:, 1])), shape=(n, n)
        )
        geo = dijkstra(w + w.T, directed=False, indices=list(body.feedback))
        self._geodesic = geo.T          # (n_nodes, n_feedback)
        self.settle()

    @property
    def n_command(self) -> int:
        return 2 * len(self.body.grasp)

    def settle(self):
        kernels.relax_springs(
            self.pos, self.body.springs[:, 0], self.body.springs[:, 1],
            self.body.rest, self.body.stiffness, self._free,
            self.relax_iters, self.damping, self._verts, self._offs,
            self.env.workspace.width, self.env.workspace.height,
        )

    def observe(self) -> np.ndarray:
        return self.pos[list(self.body.feedback)].copy()

    def robot(self) -> np.ndarray:
        return self.pos[list(self.body.grasp)].copy()

    def command(self, dr) -> np.ndarray:
        dr = np.asarray(dr, dtype=np.float64).reshape(-1, 2)
        self.pos[list(self.body.grasp)] += dr
        self.settle()
        return self.observe()

    def body_witness(self) -> BodyWitness | None:
        """Closest body-edge/obstacle pair plus the topologically nearest
        feedback point; None when the environment has no obstacles."""
        if not self.env.obstacles:
            return None
        a = self.pos[self.body.springs[:, 0]]
        b = self.pos[self.body.springs[:, 1]]
        d = self.env.segments_clearance(a, b)
        e = int(np.argmin(d))
        out = kernels.body_obstacle_witness(a[e:e + 1], b[e:e + 1],
                                            self._verts, self._offs)
        dist, p, q = float(out[0]), out[1:3].copy(), out[3:5].copy()
        i, j = self.body.springs[e]
        along_i = np.linalg.norm(p - self.pos[i]) + self._geodesic[i]
        along_j = np.linalg.norm(p - self.pos[j]) + self._geodesic[j]
        f = int(np.argmin(np.minimum(along_i, along_j)))
        return BodyWitness(dist, p, q, f)


def shape_measure(points, feature, rest_points) -> np.ndarray:
    """Signed relative change of the two angle-side lengths.

    For a point-angle feature with triple (i, j, k), returns
    (d|s_i - s_j| / |.|_0, d|s_k - s_j| / |.|_0); generic features fall back
    to consecutive-segment ratios.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    rest = np.asarray(rest_points, dtype=np.float64).reshape(-1, 2)
    if getattr(feature, "kind", None) == "point_angle":
        i, j, k = feature.angle
        pairs = [(i, j), (k, j)]
    else:
        pairs = [(a + 1, a) for a in range(len(pts) - 1)]
    out = []
    for a, b in pairs:
        l0 = float(np.linalg.norm(rest[a] - rest[b]))
        l1 = float(np.linalg.norm(pts[a] - pts[b]))
        out.append((l1 - l0) / l0 if l0 > 0 else 0.0)
    return np.array(out)


class AffinePlant:
    """Linear observation model S = A r + b, for controller identification."""

    def __init__(self, gain, offset, r0=None):
        self.gain = np.asarray(gain, dtype=np.float64)
        self.offset = np.asarray(offset, dtype=np.float64).ravel()
        n = self.gain.shape[1]
        self.r = np.zeros(n) if r0 is None else np.asarray(r0, dtype=np.float64).copy()

    @property
    def n_command(self) -> int:
        return self.gain.shape[1]

    def observe(self) -> np.ndarray:
        return (self.gain @ self.r + self.offset).reshape(-1, 2)

    def robot(self) -> np.ndarray:
        return self.r.reshape(-1, 2).copy()

    def command(self, dr) -> np.ndarray:
        self.r = self.r + np.asarray(dr, dtype=np.float64).ravel()
        return self.observe()
