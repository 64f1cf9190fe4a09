"""Path-set construction around a pivot path.

The pivot path is transferred rigidly to every other feedback point.  When the
rigid transfer assumptions hold, each transferred path only needs its tail
re-attached to the true target (basic branch).  Otherwise the pivot path is
repositioned inside the passages it crosses, the transferred crossings are
compressed toward the pivot crossing, and the whole path is reshaped by
anchor blending (general branch).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CenteringInfeasible,
    ConcatenationInfeasible,
    InvalidGoal,
    InvalidStart,
    MissingCrossing,
    NoPath,
    RejectionLimit,
    TransferInfeasible,
)
from .geometry import min_distance
from .paths import (
    Certificate,
    Path,
    PathSet,
    blend_with_base,
    concat,
    straight_path,
    strong_homotopic_like,
)
from .planner import PlannerConfig, path_passage_list, plan


@dataclass
class TransferOptions:
    delta_min: float = 2.0        # interior margin inside passages, px
    resolution: float = 2.0       # homotopy sweep resolution, px
    pivot_cost: str = "auto"      # "auto": length on the basic branch, composite otherwise
    max_extra_anchors: int = 8    # collision-repair anchor budget per path


@dataclass
class TransferAssumptionReport:
    """Whether the rigid-transfer assumptions are met."""

    delta_p: float
    pivot_path_in_interior: bool
    reference_target_feasible: bool
    pivot_before: Path | None = None          # pivot path before repositioning
    repositioning: list = field(default_factory=list)  # (tau, shift) anchors applied

    def holds(self) -> bool:
        return self.pivot_path_in_interior and self.reference_target_feasible


def point_spread(points, pivot: int) -> float:
    """Largest distance from the pivot point to any other point of the set."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return float(np.max(np.linalg.norm(pts - pts[pivot], axis=1)))


def pivot_spread(s0, sd, pivot: int) -> float:
    """Transfer radius delta_p: the larger spread of the two configurations."""
    return max(point_spread(s0, pivot), point_spread(sd, pivot))


def reference_target(s0, pivot: int, sd_pivot) -> np.ndarray:
    """Targets obtained by applying the pivot displacement to every point."""
    s0 = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    return s0 + (np.asarray(sd_pivot, dtype=np.float64) - s0[pivot])


def circle_polyline_crossings(path: Path, center, radius: float):
    """(arc_length, point) intersections of a circle with a polyline, ordered."""
    c = np.asarray(center, dtype=np.float64)
    out = []
    nodes, cum = path.nodes, path.cum
    for i in range(len(nodes) - 1):
        a = nodes[i]
        ab = nodes[i + 1] - a
        seg = float(np.linalg.norm(ab))
        ac = a - c
        qa = float(ab @ ab)
        qb = 2.0 * float(ab @ ac)
        qc = float(ac @ ac) - radius * radius
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0 or qa <= 0.0:
            continue
        sq = np.sqrt(disc)
        for t in ((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)):
            if -1e-12 <= t <= 1.0 + 1e-12:
                t = min(max(t, 0.0), 1.0)
                arc = cum[i] + t * seg
                if out and abs(out[-1][0] - arc) < 1e-9:
                    continue
                out.append((arc, a + t * ab))
    return out


def basic_forward_transfer(s0, sd, pivot_path: Path, pivot: int, env=None) -> PathSet:
    """Rigid transfer of the pivot path with shortest-tail reconnection.

    Every produced path starts exactly at s0[i] and ends exactly at sd[i].
    The closing segment is collision-checked when ``env`` is given.
    """
    s0 = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    sd = np.asarray(sd, dtype=np.float64).reshape(-1, 2)
    paths: list[Path | None] = [None] * len(s0)
    paths[pivot] = pivot_path
    for i in range(len(s0)):
        if i == pivot:
            continue
        tp = pivot_path.translated(s0[i] - s0[pivot])
        tail = float(np.linalg.norm(sd[i] - tp.end))
        if tail <= 1e-9:
            paths[i] = tp
            continue
        cands = circle_polyline_crossings(tp, sd[i], tail)
        if not cands or abs(cands[-1][0] - tp.length) > 1e-6:
            cands.append((tp.length, tp.end.copy()))
        arc, pt = cands[0]
        if env is not None and not env.segment_free(pt, sd[i], 0.0):
            raise ConcatenationInfeasible(
                f"closing segment of path {i} collides"
            )
        closing = straight_path(pt, sd[i])
        if arc <= 1e-9:
            paths[i] = closing
        else:
            paths[i] = concat(tp.subpath(0.0, arc / tp.length), closing, tol=1e-6)
    return PathSet(paths=paths, pivot=pivot)


# -- passage-line crossings ----------------------------------------------------


def passage_line_crossings(path: Path, passage):
    """(tau, point) crossings of a path with the infinite passage line."""
    f = (path.nodes - passage.segment[0]) @ passage.normal
    f = np.where(np.abs(f) < 1e-12, 1e-12, f)
    out = []
    for i in range(len(f) - 1):
        if f[i] * f[i + 1] < 0.0:
            t = f[i] / (f[i] - f[i + 1])
            pt = path.nodes[i] + t * (path.nodes[i + 1] - path.nodes[i])
            arc = path.cum[i] + t * (path.cum[i + 1] - path.cum[i])
            out.append((arc / path.length, pt))
    return out


def nearest_line_crossing(path: Path, passage, tau_hint: float):
    cands = passage_line_crossings(path, passage)
    if not cands:
        raise MissingCrossing("path never crosses the passage line")
    return min(cands, key=lambda c: abs(c[0] - tau_hint))


def chord_at_passage(paths, passage, tau_hint: float):
    """Crossing points of all paths with the passage line and the chord length."""
    pts = np.vstack([nearest_line_crossing(p, passage, tau_hint)[1] for p in paths])
    coords = np.array([passage.coord(pt) for pt in pts])
    return pts, float(coords.max() - coords.min())


def _interior_interval(env, passage, delta_min: float, samples: int = 257):
    ss = np.linspace(0.0, passage.width, samples)
    pts = passage.segment[0][None, :] + ss[:, None] * passage.direction[None, :]
    ok = env.points_clearance(pts) >= delta_min
    if not ok.any():
        raise CenteringInfeasible(
            f"passage {passage.obstacles} has no {delta_min}px interior"
        )
    idx = np.nonzero(ok)[0]
    return float(ss[idx[0]]), float(ss[idx[-1]])


def reposition_pivot(pivot_path: Path, offsets, env, delta_min: float = 2.0,
                     narrow_below: float = np.inf):
    """Shift the pivot path inside each crossed narrow passage so the set fits.

    ``offsets`` are the rigid-transfer displacements of all paths (zero row
    for the pivot itself); only passages narrower than ``narrow_below`` are
    considered (wide ones never constrain the set).  Three cases per passage:
    center the chord when it is wider than the passage, translate it inside
    the interior when it is misplaced, and otherwise leave the crossing
    alone.  Returns the remapped path and the anchor list actually applied.
    """
    offsets = np.asarray(offsets, dtype=np.float64).reshape(-1, 2)
    recs = [r for r in path_passage_list(pivot_path, env)
            if env.passages[r.index].width < narrow_below]
    anchors = []
    for rec in recs:
        psg = env.passages[rec.index]
        s_vals = []
        for off in offsets:
            tp = pivot_path.translated(off)
            _, pt = nearest_line_crossing(tp, psg, rec.tau)
            s_vals.append(psg.coord(pt))
        s_vals = np.array(s_vals)
        chord = float(s_vals.max() - s_vals.min())
        lo, hi = _interior_interval(env, psg, delta_min)
        s_p = psg.coord(rec.point)
        if psg.width < chord:
            shift = 0.5 * (psg.width - (s_vals.max() + s_vals.min()))
            shift = float(np.clip(shift, lo - s_p, hi - s_p))
        else:
            if s_vals.min() >= lo and s_vals.max() <= hi:
                continue
            slo, shi = lo - s_vals.min(), hi - s_vals.max()
            if slo > shi:
                raise CenteringInfeasible(
                    f"chord of width {chord:.2f} cannot fit passage {psg.obstacles}"
                )
            shift = float(np.clip(0.0, slo, shi))
        anchors.append((rec.tau, shift * psg.direction))
    blended, _ = blend_with_base(pivot_path, anchors)
    return blended, anchors


def _first_bad_interval(path: Path, env):
    a, b = path.nodes[:-1], path.nodes[1:]
    w, h = env.workspace.width, env.workspace.height
    bad = env.segments_clearance(a, b) < 0.0
    outside = (
        (a[:, 0] < 0) | (a[:, 0] > w) | (a[:, 1] < 0) | (a[:, 1] > h)
        | (b[:, 0] < 0) | (b[:, 0] > w) | (b[:, 1] < 0) | (b[:, 1] > h)
    )
    bad |= outside
    if not bad.any():
        return None
    k0 = int(np.argmax(bad))
    k1 = k0
    while k1 + 1 < len(bad) and bad[k1 + 1]:
        k1 += 1
    return k0, k1


def _span_clear(nodes, shift, env) -> bool:
    q = np.asarray(nodes, dtype=np.float64) + shift
    if len(q) < 2:
        q = np.vstack([q, q])
    w, h = env.workspace.width, env.workspace.height
    if ((q[:, 0] < 0) | (q[:, 0] > w) | (q[:, 1] < 0) | (q[:, 1] > h)).any():
        return False
    return bool((env.segments_clearance(q[:-1], q[1:]) >= 0.0).all())


def _repair_blend(tp: Path, anchors, env, max_extra: int, offset=None):
    """Blend with anchors; on collision, extend the stronger neighbouring
    anchor shift across the colliding interval, or pull the interval toward
    the pivot (a locally stronger compression ratio) when that shift does
    not clear it, and retry."""
    anchors = list(anchors)
    extra = 0
    while True:
        blended, base = blend_with_base(tp, anchors)
        bad = _first_bad_interval(blended, env)
        if bad is None:
            return blended
        if extra + 2 > max_extra:
            raise TransferInfeasible(
                "transferred path still collides after anchor budget"
            )
        k0, k1 = bad
        t_a = float(base.params[k0])
        t_b = float(base.params[min(k1 + 1, len(base.params) - 1)])
        span = base.nodes[k0:min(k1 + 2, len(base.nodes))]
        srt = sorted(anchors, key=lambda x: x[0])
        left = [a for a in srt if a[0] <= t_a + 1e-9]
        right = [a for a in srt if a[0] >= t_b - 1e-9]
        cands = [a[1] for a in (left[-1:] + right[:1])]
        carry = max(cands, key=lambda s: float(np.linalg.norm(s))) if cands else None
        if (carry is None or not _span_clear(span, carry, env)) and offset is not None:
            carry = None
            for r in (0.75, 0.5, 0.25, 0.0):
                cand = (r - 1.0) * np.asarray(offset, dtype=np.float64)
                if _span_clear(span, cand, env):
                    carry = cand
                    break
        if carry is None:
            raise TransferInfeasible("collision outside any anchored span")
        changed = False
        for t in (t_a, t_b):
            if not 0.0 < t < 1.0:
                continue
            near = [j for j, a in enumerate(anchors) if abs(t - a[0]) <= 1e-9]
            if not near:
                anchors.append((t, carry))
                extra += 1
                changed = True
            elif np.linalg.norm(anchors[near[0]][1] - carry) > 1e-9:
                anchors[near[0]] = (anchors[near[0]][0], carry)
                extra += 1
                changed = True
        if not changed:
            raise TransferInfeasible("anchor refinement stalled")


def deformable_transfer(s0, sd, pivot_star: Path, pivot: int, env,
                        opts: TransferOptions | None = None,
                        narrow_below: float = np.inf) -> PathSet:
    """Transfer around a repositioned pivot path with chord compression.

    At each narrow-passage crossing (width below ``narrow_below``) the
    transferred crossings are pulled toward the pivot crossing by the smaller
    of the two side ratios (clearance over farthest same-side crossing
    distance), capped at one; ends are pinned at the true targets.
    """
    opts = opts or TransferOptions()
    s0 = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    sd = np.asarray(sd, dtype=np.float64).reshape(-1, 2)
    K = len(s0)
    recs = [r for r in path_passage_list(pivot_star, env)
            if env.passages[r.index].width < narrow_below]
    obstacles = {o.id: o for o in env.obstacles}

    trans = {}
    for i in range(K):
        if i != pivot:
            trans[i] = pivot_star.translated(s0[i] - s0[pivot])

    per_rec = []
    for rec in recs:
        psg = env.passages[rec.index]
        c_p = rec.point
        s_p = psg.coord(c_p)
        crossings = {pivot: (rec.tau, c_p, s_p)}
        for i, tp in trans.items():
            tau_i, pt_i = nearest_line_crossing(tp, psg, rec.tau)
            crossings[i] = (tau_i, pt_i, psg.coord(pt_i))
        svals = np.array([c[2] for c in crossings.values()])
        gamma_a = min_distance(c_p, obstacles[psg.obstacles[0]])
        gamma_b = min_distance(c_p, obstacles[psg.obstacles[1]])
        beta_a = max((s_p - c[2] for c in crossings.values() if c[2] < s_p), default=0.0)
        beta_b = max((c[2] - s_p for c in crossings.values() if c[2] > s_p), default=0.0)
        ratio = 1.0
        if beta_a > 0.0:
            ratio = min(ratio, gamma_a / beta_a)
        if beta_b > 0.0:
            ratio = min(ratio, gamma_b / beta_b)
        per_rec.append((rec, crossings, ratio))

    paths: list[Path | None] = [None] * K
    paths[pivot] = pivot_star
    for i, tp in trans.items():
        anchors = []
        for rec, crossings, ratio in per_rec:
            tau_i, pt_i, _ = crossings[i]
            c_p = rec.point
            target = c_p + ratio * (pt_i - c_p)
            anchors.append((tau_i, target - pt_i))
        anchors.append((1.0, sd[i] - tp.end))
        paths[i] = _repair_blend(tp, anchors, env, opts.max_extra_anchors,
                                 offset=s0[i] - s0[pivot])
    return PathSet(paths=paths, pivot=pivot)


# -- top-level generation -------------------------------------------------------


def _pin_end(path: Path, goal, env) -> Path:
    goal = np.asarray(goal, dtype=np.float64)
    if np.linalg.norm(path.end - goal) <= 1e-9:
        return path
    if not env.segment_free(path.end, goal, 0.0):
        raise ConcatenationInfeasible("goal-disk closing segment collides")
    return concat(path, straight_path(path.end, goal))


def final_chords(ps: PathSet, env) -> dict[int, float]:
    """Chord length of the final path set at every passage the pivot crosses."""
    chords: dict[int, float] = {}
    for rec in path_passage_list(ps.pivot_path, env):
        psg = env.passages[rec.index]
        coords = []
        for p in ps.paths:
            try:
                _, pt = nearest_line_crossing(p, psg, rec.tau)
            except MissingCrossing:
                continue
            coords.append(psg.coord(pt))
        if len(coords) >= 2:
            chord = float(max(coords) - min(coords))
            chords[rec.index] = max(chords.get(rec.index, 0.0), chord)
    return chords


def generate_path_set(s0, sd, pivot: int, env, planner_cfg: PlannerConfig | None = None,
                      opts: TransferOptions | None = None, seed=None):
    """Full pipeline: pivot plan, branch choice, transfer, certification.

    Returns (PathSet, TransferAssumptionReport).  The basic branch plans the
    pivot inside the delta_p interior without passage encoding; the general
    branch plans with the composite cost, repositions crossings, and runs the
    deformable transfer.
    """
    cfg = planner_cfg or PlannerConfig()
    opts = opts or TransferOptions()
    s0 = np.asarray(s0, dtype=np.float64).reshape(-1, 2)
    sd = np.asarray(sd, dtype=np.float64).reshape(-1, 2)
    rng = np.random.default_rng(seed)
    dp = pivot_spread(s0, sd, pivot)

    pivot_path = None
    try:
        cost1 = "length" if opts.pivot_cost == "auto" else opts.pivot_cost
        cfg1 = replace(cfg, delta=max(dp, cfg.delta), cost=cost1)
        pivot_path = _pin_end(plan(s0[pivot], sd[pivot], env, cfg1, rng=rng), sd[pivot], env)
    except (InvalidStart, InvalidGoal, NoPath, RejectionLimit, ConcatenationInfeasible):
        pivot_path = None

    ref = reference_target(s0, pivot, sd[pivot])
    ref_ok = bool((env.points_clearance(ref) >= opts.delta_min).all())
    if ref_ok and len(ref) > 1:
        ref_ok = bool(env.segments_free(ref[:-1], ref[1:], 0.0).all())
    report = TransferAssumptionReport(
        delta_p=dp,
        pivot_path_in_interior=pivot_path is not None,
        reference_target_feasible=ref_ok,
    )

    if report.holds():
        ps = basic_forward_transfer(s0, sd, pivot_path, pivot, env)
        branch = "basic"
    else:
        cost2 = "composite" if opts.pivot_cost == "auto" else opts.pivot_cost
        cfg2 = replace(cfg, cost=cost2)
        raw = _pin_end(plan(s0[pivot], sd[pivot], env, cfg2, rng=rng), sd[pivot], env)
        offsets = s0 - s0[pivot]
        narrow = 2.0 * dp
        star, anchors = reposition_pivot(raw, offsets, env, opts.delta_min, narrow)
        report.pivot_before = raw
        report.repositioning = anchors
        ps = deformable_transfer(s0, sd, star, pivot, env, opts, narrow)
        branch = "general"

    ps.chords = final_chords(ps, env)
    verdict = strong_homotopic_like(ps.paths, env, opts.resolution)
    ps.certificate = Certificate(
        branch=branch, strong_homotopic_like=verdict, resolution=opts.resolution
    )
    return ps, report
