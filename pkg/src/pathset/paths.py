"""Polyline paths with arc-length parameterization, plus path-set primitives.

A path is an ordered polyline sampled by normalized arc length tau in [0, 1].
Concatenation places the junction at tau = len1 / (len1 + len2) automatically
because parameters are recomputed from cumulative length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import EndpointMismatch, PathError

_CHUNK = 16384


class Path:
    """Immutable planar polyline parameterized by normalized arc length."""

    __slots__ = ("nodes", "cum", "params", "length")

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=np.float64).reshape(-1, 2)
        if nodes.shape[0] < 2:
            raise PathError("a path needs at least two nodes")
        seg = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
        keep = np.concatenate([[True], seg > 1e-12])
        nodes = nodes[keep]
        if nodes.shape[0] < 2:
            raise PathError("path has zero length")
        seg = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.nodes = nodes
        self.cum = cum
        self.length = float(cum[-1])
        self.params = cum / self.length

    # -- basic accessors ----------------------------------------------------

    @property
    def start(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def end(self) -> np.ndarray:
        return self.nodes[-1]

    def point_at(self, tau: float) -> np.ndarray:
        t = min(max(float(tau), 0.0), 1.0)
        return np.array(
            [
                np.interp(t, self.params, self.nodes[:, 0]),
                np.interp(t, self.params, self.nodes[:, 1]),
            ]
        )

    def points_at(self, taus) -> np.ndarray:
        t = np.clip(np.asarray(taus, dtype=np.float64), 0.0, 1.0)
        return np.column_stack(
            [
                np.interp(t, self.params, self.nodes[:, 0]),
                np.interp(t, self.params, self.nodes[:, 1]),
            ]
        )

    def segment_index(self, tau: float) -> int:
        """Index i of the segment nodes[i] -> nodes[i+1] containing tau."""
        t = min(max(float(tau), 0.0), 1.0)
        i = int(np.searchsorted(self.params, t, side="right") - 1)
        return min(max(i, 0), len(self.nodes) - 2)

    def direction_at(self, tau: float) -> np.ndarray:
        i = self.segment_index(tau)
        d = self.nodes[i + 1] - self.nodes[i]
        return d / np.linalg.norm(d)

    # -- derived paths ------------------------------------------------------

    def translated(self, v) -> "Path":
        return Path(self.nodes + np.asarray(v, dtype=np.float64))

    def subpath(self, t0: float, t1: float) -> "Path":
        if not t0 < t1:
            raise PathError("subpath needs t0 < t1")
        i0 = int(np.searchsorted(self.params, t0, side="right"))
        i1 = int(np.searchsorted(self.params, t1, side="left"))
        mid = self.nodes[i0:i1]
        return Path(np.vstack([self.point_at(t0)[None, :], mid, self.point_at(t1)[None, :]]))

    def densified(self, max_spacing: float | None = None, min_nodes: int | None = None) -> "Path":
        """Subdivide segments without moving any original vertex."""
        if max_spacing is None:
            if min_nodes is None:
                raise ValueError("give max_spacing or min_nodes")
            max_spacing = self.length / max(min_nodes - 1, 1)
        pieces = [self.nodes[:1]]
        for i in range(len(self.nodes) - 1):
            a, b = self.nodes[i], self.nodes[i + 1]
            m = max(int(np.ceil(np.linalg.norm(b - a) / max_spacing)), 1)
            ts = np.linspace(0.0, 1.0, m + 1)[1:]
            pieces.append(a + ts[:, None] * (b - a))
        return Path(np.vstack(pieces))

    def with_params(self, taus) -> "Path":
        """Insert nodes at the given parameters (existing nodes untouched)."""
        taus = np.asarray(taus, dtype=np.float64)
        extra = []
        for t in taus:
            if np.min(np.abs(self.params - t)) > 1e-12:
                extra.append(min(max(t, 0.0), 1.0))
        if not extra:
            return self
        allp = np.sort(np.concatenate([self.params, extra]))
        return Path(self.points_at(allp))


def straight_path(a, b) -> Path:
    return Path(np.vstack([a, b]))


def concat(p1: Path, p2: Path, tol: float = 1e-9) -> Path:
    """Join two paths end to start; the junction keeps both lengths' ratio."""
    if np.linalg.norm(p1.end - p2.start) > tol:
        raise EndpointMismatch("second path must start where the first ends")
    return Path(np.vstack([p1.nodes, p2.nodes[1:]]))


def blend_with_base(path: Path, anchors) -> tuple[Path, Path]:
    """Shift a path by piecewise-linear blending of anchor displacements.

    ``anchors`` is a sequence of (tau, shift_vector).  Anchors at 0 and 1 with
    zero shift are implied unless given.  Anchor parameters become path nodes
    so each anchor target is met exactly.  Returns (blended, base) where base
    is the input path with the anchor nodes inserted; node k of the blended
    path corresponds to node k of the base path.
    """
    anchors = sorted(anchors, key=lambda a: a[0])
    merged = []
    for t, s in anchors:
        if merged and abs(merged[-1][0] - t) < 1e-9:
            merged[-1] = (t, np.asarray(s, dtype=np.float64))
        else:
            merged.append((float(t), np.asarray(s, dtype=np.float64)))
    if not merged or merged[0][0] > 1e-12:
        merged.insert(0, (0.0, np.zeros(2)))
    if merged[-1][0] < 1.0 - 1e-12:
        merged.append((1.0, np.zeros(2)))
    taus = np.array([t for t, _ in merged])
    shifts = np.vstack([s for _, s in merged])
    base = path.with_params(taus)
    sx = np.interp(base.params, taus, shifts[:, 0])
    sy = np.interp(base.params, taus, shifts[:, 1])
    return Path(base.nodes + np.column_stack([sx, sy])), base


def blend_shifted(path: Path, anchors) -> Path:
    return blend_with_base(path, anchors)[0]


# -- homotopy checks ----------------------------------------------------------


def _segments_ok(env, a, b) -> bool:
    w, h = env.workspace.width, env.workspace.height
    for lo in range(0, len(a), _CHUNK):
        aa, bb = a[lo : lo + _CHUNK], b[lo : lo + _CHUNK]
        if (aa < 0).any() or (bb < 0).any():
            return False
        if (aa[:, 0] > w).any() or (bb[:, 0] > w).any():
            return False
        if (aa[:, 1] > h).any() or (bb[:, 1] > h).any():
            return False
        if (env.segments_clearance(aa, bb) < 0.0).any():
            return False
    return True


def straight_line_homotopy_feasible(p1: Path, p2: Path, env, resolution: float = 2.0) -> bool:
    """Sweep the straight-line blend between two same-endpoint paths.

    The blend (1-x) p1(tau) + x p2(tau) is sampled on an (x, tau) grid fine
    enough that neighbouring samples are closer than ``resolution``; every
    grid edge must stay collision-free.
    """
    if np.linalg.norm(p1.start - p2.start) > 1e-6 or np.linalg.norm(p1.end - p2.end) > 1e-6:
        raise EndpointMismatch("homotopy sweep needs shared endpoints")
    n_tau = max(int(np.ceil(max(p1.length, p2.length) / resolution)), 1) + 1
    taus = np.linspace(0.0, 1.0, n_tau)
    a = p1.points_at(taus)
    b = p2.points_at(taus)
    gap = float(np.max(np.linalg.norm(a - b, axis=1)))
    n_x = max(int(np.ceil(gap / resolution)), 1)
    prev = a
    if not _segments_ok(env, prev[:-1], prev[1:]):
        return False
    for j in range(1, n_x + 1):
        x = j / n_x
        row = (1.0 - x) * a + x * b
        if not _segments_ok(env, row[:-1], row[1:]):
            return False
        if not _segments_ok(env, prev, row):
            return False
        prev = row
    return True


def comparison_path(pi: Path, pj: Path) -> Path:
    """pj-endpoint version of pi: straight connectors splice pi between
    pj's endpoints, so the two can be swept directly."""
    parts = []
    if np.linalg.norm(pj.start - pi.start) > 1e-9:
        parts.append(straight_path(pj.start, pi.start))
    parts.append(pi)
    if np.linalg.norm(pi.end - pj.end) > 1e-9:
        parts.append(straight_path(pi.end, pj.end))
    out = parts[0]
    for p in parts[1:]:
        out = concat(out, p)
    return out


def pair_homotopic_like(pi: Path, pj: Path, env, resolution: float = 2.0) -> bool:
    """Homotopy relation for paths that need not share endpoints."""
    return straight_line_homotopy_feasible(comparison_path(pi, pj), pj, env, resolution)


def strong_homotopic_like(paths, env, resolution: float = 2.0) -> bool:
    """True when every unordered pair of paths passes the pairwise check.

    Empty and singleton collections qualify by convention.
    """
    paths = list(paths)
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if not pair_homotopic_like(paths[i], paths[j], env, resolution):
                return False
    return True


# -- smoothing ----------------------------------------------------------------


def smooth(path: Path, env=None, samples: int = 200) -> Path:
    """Clamped quadratic B-spline over the node polygon, resampled.

    Keeps both endpoints exactly.  When ``env`` is given and the smoothed
    polyline collides, the input path is returned unchanged.
    """
    n = len(path.nodes)
    if n < 3:
        return path
    interior = np.linspace(0.0, 1.0, n - 1)[1:-1]
    knots = np.concatenate([[0.0, 0.0, 0.0], interior, [1.0, 1.0, 1.0]])
    spl = BSpline(knots, path.nodes, 2)
    pts = spl(np.linspace(0.0, 1.0, samples))
    try:
        out = Path(pts)
    except PathError:
        return path
    if env is not None and not _segments_ok(env, out.nodes[:-1], out.nodes[1:]):
        return path
    return out


# -- containers ---------------------------------------------------------------


@dataclass
class Certificate:
    """How a path set was produced and whether the mutual-homotopy check held."""

    branch: str
    strong_homotopic_like: bool
    resolution: float


@dataclass
class PathSet:
    """One path per feedback point; ``paths[pivot]`` is the pivot path."""

    paths: list[Path]
    pivot: int
    certificate: Certificate | None = None
    chords: dict[int, float] = field(default_factory=dict)

    @property
    def starts(self) -> np.ndarray:
        return np.vstack([p.start for p in self.paths])

    @property
    def ends(self) -> np.ndarray:
        return np.vstack([p.end for p in self.paths])

    @property
    def pivot_path(self) -> Path:
        return self.paths[self.pivot]
