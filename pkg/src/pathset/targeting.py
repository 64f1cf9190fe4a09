"""Target distribution determination from a task feature.

A task feature maps the feedback-point distribution to the quantity the task
actually pins down (one point, a point plus a bend angle, or a full subset of
points).  Points whose position the feature determines are "complete"; the
rest are placed by a small constrained optimization that stays close to a
rigidly moved reference distribution while keeping clear of obstacles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateAngle, NoFeasibleTarget, TargetError


@dataclass(frozen=True)
class FeatureDef:
    """Task-feature description.

    kind "single_point": y = position of ``point``.
    kind "point_angle":  y = (position of ``point``, angle at ``angle[1]``
                          between the rays to ``angle[0]`` and ``angle[2]``);
                          ``point`` must be the angle vertex.
    kind "direct":       y = stacked positions of ``points`` (all when None).
    kind "custom":       y = fn(S); optional analytic ``jac``; ``complete``
                          lists the point indices the feature pins down.
    """

    kind: str
    point: int | None = None
    angle: tuple[int, int, int] | None = None
    points: tuple[int, ...] | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    complete: tuple[int, ...] = field(default=())

    def dim(self, n_points: int) -> int:
        if self.kind == "single_point":
            return 2
        if self.kind == "point_angle":
            return 3
        if self.kind == "direct":
            return 2 * len(self.subset(n_points))
        if self.kind == "custom":
            probe = self.fn(np.zeros((n_points, 2)))
            return int(np.asarray(probe).size)
        raise TargetError(f"unknown feature kind {self.kind!r}")

    def subset(self, n_points: int) -> tuple[int, ...]:
        return self.points if self.points is not None else tuple(range(n_points))

    def complete_points(self, n_points: int) -> tuple[int, ...]:
        if self.kind == "single_point":
            return (self.point,)
        if self.kind == "point_angle":
            return (self.point,)
        if self.kind == "direct":
            return self.subset(n_points)
        return tuple(self.complete)


def angle_at(a, b, c) -> float:
    """Angle in (0, pi) at vertex b of the triple (a, b, c)."""
    u = np.asarray(a, dtype=np.float64) - b
    v = np.asarray(c, dtype=np.float64) - b
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-12 or nv < 1e-12:
        raise DegenerateAngle("angle vertex coincides with a ray point")
    cosa = float(np.clip(u @ v / (nu * nv), -1.0, 1.0))
    return float(np.arccos(cosa))


def feature_eval(points, feat: FeatureDef) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if feat.kind == "single_point":
        return pts[feat.point].copy()
    if feat.kind == "point_angle":
        i, j, k = feat.angle
        return np.append(pts[feat.point], angle_at(pts[i], pts[j], pts[k]))
    if feat.kind == "direct":
        return pts[list(feat.subset(len(pts)))].ravel()
    if feat.kind == "custom":
        return np.asarray(feat.fn(pts), dtype=np.float64).ravel()
    raise TargetError(f"unknown feature kind {feat.kind!r}")


def _angle_gradient(pts, triple):
    """Rows of d(angle)/d(points) for the vertex triple, as a (K,2) array."""
    i, j, k = triple
    u = pts[i] - pts[j]
    v = pts[k] - pts[j]
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    uh, vh = u / nu, v / nv
    cosa = float(np.clip(uh @ vh, -1.0, 1.0))
    sina = np.sqrt(max(1.0 - cosa * cosa, 0.0))
    if sina < 1e-9:
        raise DegenerateAngle("collinear triple has no angle gradient")
    du = -(vh - cosa * uh) / (nu * sina)
    dv = -(uh - cosa * vh) / (nv * sina)
    g = np.zeros_like(pts)
    g[i] = du
    g[k] = dv
    g[j] = -(du + dv)
    return g


def feature_jacobian(points, feat: FeatureDef) -> np.ndarray:
    """d(feature)/d(points) as an (m, 2K) matrix; finite differences for
    custom features without an analytic form."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if feat.kind == "single_point":
        jac = np.zeros((2, 2 * n))
        jac[0, 2 * feat.point] = 1.0
        jac[1, 2 * feat.point + 1] = 1.0
        return jac
    if feat.kind == "point_angle":
        jac = np.zeros((3, 2 * n))
        jac[0, 2 * feat.point] = 1.0
        jac[1, 2 * feat.point + 1] = 1.0
        jac[2] = _angle_gradient(pts, feat.angle).ravel()
        return jac
    if feat.kind == "direct":
        sub = feat.subset(n)
        jac = np.zeros((2 * len(sub), 2 * n))
        for a, p in enumerate(sub):
            jac[2 * a, 2 * p] = 1.0
            jac[2 * a + 1, 2 * p + 1] = 1.0
        return jac
    if feat.kind == "custom":
        if feat.jac is not None:
            return np.asarray(feat.jac(pts), dtype=np.float64)
        y0 = feature_eval(pts, feat)
        jac = np.zeros((y0.size, 2 * n))
        h = 1e-6
        for c in range(2 * n):
            bump = pts.copy().ravel()
            bump[c] += h
            yp = feature_eval(bump.reshape(-1, 2), feat)
            bump[c] -= 2 * h
            ym = feature_eval(bump.reshape(-1, 2), feat)
            jac[:, c] = (yp - ym) / (2 * h)
        return jac
    raise TargetError(f"unknown feature kind {feat.kind!r}")


def select_pivot(points, feat: FeatureDef) -> int:
    """Complete point whose Jacobian block has the largest Frobenius norm."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    complete = feat.complete_points(len(pts))
    if not complete:
        raise TargetError("feature pins down no point; no pivot available")
    jac = feature_jacobian(pts, feat)
    norms = [np.linalg.norm(jac[:, 2 * p:2 * p + 2]) for p in complete]
    return int(complete[int(np.argmax(norms))])


def kabsch(src, dst):
    """Best-fit rotation R and translation t with dst ~ src @ R.T + t."""
    src = np.asarray(src, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 2)
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, d]) @ u.T
    return rot, cd - rot @ cs


def reference_distribution(s0, feat: FeatureDef, y_d, pivot: int | None = None) -> np.ndarray:
    """Rigidly moved copy of s0 whose pivot lands exactly on its target.

    The direct feature supplies enough targets for a best-fit rotation; the
    point features only pin one position, so the rotation stays identity.
    """
    pts = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    y = np.asarray(y_d, dtype=np.float64).ravel()
    if pivot is None:
        pivot = select_pivot(pts, feat)
    if feat.kind in ("single_point", "point_angle"):
        return pts + (y[:2] - pts[feat.point])
    if feat.kind == "direct":
        sub = list(feat.subset(len(pts)))
        tgt = y.reshape(-1, 2)
        rot, _ = kabsch(pts[sub], tgt)
        t = tgt[sub.index(pivot)] - rot @ pts[pivot]
        return pts @ rot.T + t
    raise TargetError(
        f"no reference construction for feature kind {feat.kind!r}"
    )


def evaluate_candidate(points, reference, env, complete: Sequence[int],
                       trade_off: float = 0.5) -> float:
    """Placement score over the incomplete points: reference proximity
    traded against obstacle clearance (lower is better)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ref = np.asarray(reference, dtype=np.float64).reshape(-1, 2)
    free = [i for i in range(len(pts)) if i not in set(complete)]
    if not free:
        return 0.0
    dev = float(np.mean(np.linalg.norm(pts[free] - ref[free], axis=1)))
    clear = float(np.mean(env.points_clearance(pts[free])))
    return (1.0 - trade_off) * dev - trade_off * clear


@dataclass
class TargetResult:
    distribution: np.ndarray
    pivot: int
    objective: float
    reference: np.ndarray


def _coordinate_descent(theta0, steps, decode, objective, feasible,
                        max_passes: int = 80, shrink: float = 0.5,
                        tol: float = 1e-3):
    theta = np.asarray(theta0, dtype=np.float64).copy()
    pts = decode(theta)
    if pts is None or not feasible(pts):
        return None
    best = objective(pts)
    h = np.asarray(steps, dtype=np.float64).copy()
    for _ in range(max_passes):
        improved = False
        for j in range(len(theta)):
            for sgn in (1.0, -1.0):
                cand = theta.copy()
                cand[j] += sgn * h[j]
                pts = decode(cand)
                if pts is None or not feasible(pts):
                    continue
                val = objective(pts)
                if val < best - 1e-12:
                    theta, best = cand, val
                    improved = True
                    break
        if not improved:
            h *= shrink
            if bool((h < tol).all()):
                break
    return theta, best


def determine_target(s0, feat: FeatureDef, y_d, env, trade_off: float = 0.5,
                     delta: float = 2.0, n_starts: int = 16,
                     seed=None) -> TargetResult:
    """Feasible target distribution satisfying the feature exactly.

    The feature-complete points are pinned by y_d; the rest are optimized by
    multi-start coordinate descent of the placement score, the first start
    being the projected reference distribution.  Raises NoFeasibleTarget when
    no start clears the obstacles by ``delta``.
    """
    pts0 = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    y = np.asarray(y_d, dtype=np.float64).ravel()
    n = len(pts0)
    if y.size != feat.dim(n):
        raise TargetError(
            f"target has {y.size} entries, feature needs {feat.dim(n)}"
        )
    if feat.kind == "custom":
        raise TargetError("custom features only support evaluation, not targeting")
    pivot = select_pivot(pts0, feat)
    ref = reference_distribution(pts0, feat, y, pivot)
    complete = feat.complete_points(n)
    rng = np.random.default_rng(seed)

    def feasible(pts):
        return bool((env.points_clearance(pts) >= delta).all())

    def objective(pts):
        return evaluate_candidate(pts, ref, env, complete, trade_off)

    free = [i for i in range(n) if i not in set(complete)]

    if feat.kind == "direct":
        base = ref.copy()
        for a, p in enumerate(feat.subset(n)):
            base[p] = y[2 * a:2 * a + 2]

        def decode(theta):
            pts = base.copy()
            if free:
                pts[free] = theta.reshape(-1, 2)
            return pts

        theta_ref = ref[free].ravel() if free else np.zeros(0)
        if not free:
            pts = decode(theta_ref)
            if not feasible(pts):
                raise NoFeasibleTarget("direct target violates clearance")
            return TargetResult(pts, pivot, objective(pts), ref)
        starts = [theta_ref]
        for _ in range(n_starts - 1):
            starts.append(theta_ref + rng.normal(0.0, 25.0, theta_ref.shape))
        steps = np.full(theta_ref.shape, 8.0)

    elif feat.kind == "single_point":
        base = ref.copy()
        base[feat.point] = y

        def decode(theta):
            pts = base.copy()
            pts[free] = theta.reshape(-1, 2)
            return pts

        theta_ref = ref[free].ravel()
        starts = [theta_ref]
        for _ in range(n_starts - 1):
            starts.append(theta_ref + rng.normal(0.0, 25.0, theta_ref.shape))
        steps = np.full(theta_ref.shape, 8.0)

    elif feat.kind == "point_angle":
        i, j, k = feat.angle
        if feat.point != j:
            raise TargetError("the pinned point must be the angle vertex")
        vertex = y[:2]
        alpha = float(y[2])
        if not 1e-6 < alpha < np.pi - 1e-6:
            raise DegenerateAngle(f"target angle {alpha} outside (0, pi)")
        u0 = pts0[i] - pts0[j]
        v0 = pts0[k] - pts0[j]
        turn = float(u0[0] * v0[1] - u0[1] * v0[0])
        if abs(turn) < 1e-9:
            raise DegenerateAngle("initial triple is collinear; bend side unknown")
        side = 1.0 if turn > 0.0 else -1.0
        others = [p for p in free if p not in (i, k)]

        def decode(theta):
            l_i, l_k, phi = theta[0], theta[1], theta[2]
            if l_i < 1e-3 or l_k < 1e-3:
                return None
            pts = ref.copy()
            pts[j] = vertex
            pts[i] = vertex + l_i * np.array([np.cos(phi), np.sin(phi)])
            phi_k = phi + side * alpha
            pts[k] = vertex + l_k * np.array([np.cos(phi_k), np.sin(phi_k)])
            if others:
                pts[others] = theta[3:].reshape(-1, 2)
            return pts

        theta_ref = np.concatenate([
            [np.linalg.norm(ref[i] - vertex),
             np.linalg.norm(ref[k] - vertex),
             np.arctan2(ref[i][1] - vertex[1], ref[i][0] - vertex[0])],
            ref[others].ravel() if others else np.zeros(0),
        ])
        starts = [theta_ref]
        for _ in range(n_starts - 1):
            cand = theta_ref.copy()
            cand[0] *= rng.uniform(0.6, 1.4)
            cand[1] *= rng.uniform(0.6, 1.4)
            cand[2] += rng.uniform(-np.pi, np.pi)
            if others:
                cand[3:] += rng.normal(0.0, 25.0, cand[3:].shape)
            starts.append(cand)
        steps = np.concatenate([
            [8.0, 8.0, 0.3],
            np.full(2 * len(others), 8.0),
        ])
    else:
        raise TargetError(f"unknown feature kind {feat.kind!r}")

    best = None
    for theta0 in starts:
        out = _coordinate_descent(theta0, steps, decode, objective, feasible)
        if out is None:
            continue
        theta, val = out
        if best is None or val < best[1] - 1e-12:
            best = (theta, val)
    if best is None:
        raise NoFeasibleTarget("no feasible start for target optimization")
    pts = decode(best[0])
    return TargetResult(pts, pivot, best[1], ref)
