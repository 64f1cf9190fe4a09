"""Model-free closed-loop tracking of a planned path set.

The deformation Jacobian is estimated numerically (Broyden), the feedback
points track their paths at a common pivot-led parameter, and constraint
commands are blended in by prioritized nullspace projection.  When constraint
adjustment stalls the task, a locally planned end-effector path is tracked
directly to leave the collision region.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    EscapeInfeasible,
    InvalidGoal,
    InvalidStart,
    NoPath,
    RejectionLimit,
    SkippedUpdate,
    StepBudgetExhausted,
    ZeroDistance,
)
from .paths import Path, pair_homotopic_like
from .planner import PlannerConfig, plan
from .regulation import activate, next_risky, risky_segments
from .targeting import FeatureDef, feature_eval, feature_jacobian


def clamp_speed(v, v_max: float) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n > v_max > 0.0:
        return v * (v_max / n)
    return v


# -- Jacobian estimation ---------------------------------------------------------


def broyden_update(jac, dr, ds, eta: float = 1.0, min_step: float = 1e-9) -> np.ndarray:
    """Rank-one secant update: J' = J + eta (dS - J dr) dr^T / (dr^T dr)."""
    dr = np.asarray(dr, dtype=np.float64).ravel()
    ds = np.asarray(ds, dtype=np.float64).ravel()
    nrm2 = float(dr @ dr)
    if nrm2 <= min_step * min_step:
        raise SkippedUpdate(f"command step {np.sqrt(nrm2):.2e} below threshold")
    return jac + eta * np.outer(ds - jac @ dr, dr) / nrm2


def identify_jacobian(plant, magnitude: float = 2.0, eta: float = 1.0) -> np.ndarray:
    """Initial deformation Jacobian from 2 n_g orthogonal probe motions.

    Each command coordinate is probed forward and back, so the plant ends
    where it started and every column is set by an exact secant.
    """
    n = plant.n_command
    s_prev = plant.observe().ravel()
    jac = np.zeros((s_prev.size, n))
    for c in range(n):
        for sign in (1.0, -1.0):
            dr = np.zeros(n)
            dr[c] = sign * magnitude
            s_now = plant.command(dr).ravel()
            jac = broyden_update(jac, dr, s_now - s_prev, eta)
            s_prev = s_now
    return jac


# -- path-set projection ---------------------------------------------------------


class SetProjector:
    """Nearest-node projection of every feedback point onto its path.

    Paths are densified once; the per-path node index may move at most
    ``hysteresis`` nodes backward per update (and not at all when monotone).
    """

    def __init__(self, paths, min_nodes: int = 500, hysteresis: int = 2):
        self.paths = [p.densified(min_nodes=min_nodes) for p in paths]
        self.hysteresis = int(hysteresis)
        self.index = [0] * len(self.paths)

    def update(self, points, monotone: bool = False):
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        taus = np.empty(len(self.paths))
        err = np.empty_like(points)
        for i, (path, s) in enumerate(zip(self.paths, points)):
            lo = max(self.index[i] - self.hysteresis, 0)
            d = np.linalg.norm(path.nodes[lo:] - s, axis=1)
            j = lo + int(np.argmin(d))
            if monotone:
                j = max(j, self.index[i])
            self.index[i] = j
            taus[i] = path.params[j]
            err[i] = s - path.nodes[j]
        return taus, err


def project_onto_pathset(points, paths, min_nodes: int = 500):
    """One-shot projection: (tau per path, residual e with e_i = s_i - sigma_i)."""
    return SetProjector(paths, min_nodes=min_nodes).update(points)


# -- tracking --------------------------------------------------------------------


def tracking_error(points, dense_paths, tau_pivot: float, xi: float, pivot: int,
                   conflict_cos: float = -0.5):
    """Coordinated error e_S = S - Sigma(tau_p + xi), all paths at the pivot's
    parameter (saturating at one), severe conflicts projected out."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    tau = min(tau_pivot + xi, 1.0)
    targets = np.vstack([p.point_at(tau) for p in dense_paths])
    err = points - targets
    e_p = err[pivot]
    np_ = float(np.linalg.norm(e_p))
    if np_ > 1e-12:
        e_hat = e_p / np_
        for i in range(len(err)):
            if i == pivot:
                continue
            ni = float(np.linalg.norm(err[i]))
            if ni > 1e-12 and float(err[i] @ e_p) < conflict_cos * ni * np_:
                err[i] = err[i] - (err[i] @ e_hat) * e_hat
    return err, targets


def tracking_command(e_s, jac, gain: float, v_max: float,
                     damping: float = 0.1) -> np.ndarray:
    """r_dot = -J^+ K e_S, clamped to v_max.

    The inverse is damped (Levenberg style) so near-singular output
    directions of the estimated Jacobian damp to zero instead of blowing
    up the command.
    """
    e = gain * np.asarray(e_s, dtype=np.float64).ravel()
    m = jac.shape[0]
    cmd = -jac.T @ np.linalg.solve(jac @ jac.T + damping**2 * np.eye(m), e)
    return clamp_speed(cmd, v_max)


# -- shape measure ----------------------------------------------------------------


def shape_measure(points) -> float:
    """Chain length over consecutive feedback points (stretch indicator)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def shape_jacobian(points) -> np.ndarray:
    """d(shape_measure)/d(points) as a (1, 2K) row."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    grad = np.zeros_like(pts)
    for i in range(len(pts) - 1):
        u = pts[i + 1] - pts[i]
        n = float(np.linalg.norm(u))
        if n < 1e-12:
            continue
        u = u / n
        grad[i + 1] += u
        grad[i] -= u
    return grad.reshape(1, -1)


# -- constraint channels -----------------------------------------------------------


@dataclass
class ConstraintConfig:
    k_body: float = 600.0          # c1 gain (DO-obstacle)
    k_gripper: float = 400.0       # c2 gain (robot-obstacle)
    k_shape: float = 0.02          # c3 gain (deformation extent)
    collision_threshold: float = 15.0
    influence: float = 15.0        # beyond this distance a channel idles
    shape_center: float | None = None


@dataclass
class ConstraintChannels:
    body: np.ndarray               # r_dot_c1
    gripper: np.ndarray            # r_dot_c2
    shape: np.ndarray              # r_dot_c3
    body_distance: float
    gripper_distance: float
    costs: tuple[float, float, float]


def _point_witness(p, verts, offs):
    p = np.asarray(p, dtype=np.float64).reshape(1, 2)
    out = kernels.body_obstacle_witness(p, p, verts, offs)
    return float(out[0]), out[3:5].copy()


def constraint_commands(points, handles, jac, env, act, ccfg: ConstraintConfig,
                        body_witness=None, on_zero: str = "raise") -> ConstraintChannels:
    """Per-channel gradient-descent commands of the constraint costs.

    c1 steers the feedback point topologically nearest to the body witness
    away from the obstacle through the estimated Jacobian; c2 repels the
    grasp handles directly; c3 regulates the chain length toward its
    admissible center.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    handles = np.asarray(handles, dtype=np.float64).reshape(-1, 2)
    n_r = 2 * len(handles)
    verts, offs = env.packed()
    eps = 1e-6

    d_body = np.inf
    c1 = np.zeros(n_r)
    f1 = 0.0
    if body_witness is not None:
        d_body = body_witness.distance
        if d_body <= 0.0 and act.distance > 0.0:
            if on_zero == "raise":
                raise ZeroDistance("body already in contact with an obstacle")
            d_body = eps
        if act.distance > 0.0 and d_body < ccfg.influence:
            i = body_witness.feedback_index
            block = jac[2 * i:2 * i + 2, :]
            u = body_witness.body_point - body_witness.obstacle_point
            c1 = ccfg.k_body * (block.T @ u) / max(d_body, eps) ** 4
            f1 = ccfg.k_body / (2.0 * max(d_body, eps) ** 2)

    d_grip = np.inf
    c2 = np.zeros(n_r)
    f2 = 0.0
    if len(env.obstacles):
        for k in range(len(handles)):
            d, q = _point_witness(handles[k], verts, offs)
            d_grip = min(d_grip, d)
            if d <= 0.0 and act.gripper > 0.0:
                if on_zero == "raise":
                    raise ZeroDistance("grasp handle already in contact")
                d = eps
            if act.gripper > 0.0 and d < ccfg.influence:
                c2[2 * k:2 * k + 2] = ccfg.k_gripper * (handles[k] - q) / max(d, eps) ** 4
                f2 += ccfg.k_gripper / (2.0 * max(d, eps) ** 2)

    c3 = np.zeros(n_r)
    f3 = 0.0
    if act.shape > 0.0:
        center = ccfg.shape_center if ccfg.shape_center is not None else shape_measure(points)
        h = shape_measure(points)
        jh = shape_jacobian(points) @ jac        # (1, n_r)
        c3 = -ccfg.k_shape * jh.ravel() * (h - center)
        f3 = 0.5 * (h - center) ** 2

    return ConstraintChannels(c1, c2, c3, float(d_body), float(d_grip), (f1, f2, f3))


def nullspace_projector(direction) -> np.ndarray:
    """I - g g^T for the normalized direction; identity when inactive."""
    g = np.asarray(direction, dtype=np.float64).ravel()
    n = float(np.linalg.norm(g))
    eye = np.eye(g.size)
    if n < 1e-12:
        return eye
    g = g / n
    return eye - np.outer(g, g)


def constrained_command(channels: ConstraintChannels) -> np.ndarray:
    """Prioritized blend r_c = c2 + N2 c1 + N2 N1 c3."""
    n2 = nullspace_projector(channels.gripper)
    n1 = nullspace_projector(channels.body)
    return channels.gripper + n2 @ channels.body + n2 @ (n1 @ channels.shape)


def constraint_nullspace(channels: ConstraintChannels) -> np.ndarray:
    """Projector applied to lower-priority motion than every active channel."""
    return (
        nullspace_projector(channels.gripper)
        @ nullspace_projector(channels.body)
        @ nullspace_projector(channels.shape)
    )


# -- end-effector escape ------------------------------------------------------------


@dataclass
class EscapePlan:
    path: Path
    target: np.ndarray             # primary-handle goal
    kappa: float
    offsets: np.ndarray            # per-handle offsets from the primary handle


def plan_ee_escape(handles, pivot_dense: Path, tau_now: float, env, risky,
                   d0: float, rng=None, kappa_step: float = 0.02,
                   resolution: float = 2.0) -> EscapePlan:
    """Locally planned end-effector path out of a collision region.

    The goal translates the pivot path's lookahead point by the current
    end-effector offset, with the smallest lookahead clearing the next risky
    stretch and keeping d0 clearance; the path itself comes from the
    length-cost planner and must stay homotopy-compatible with the pivot
    segment it shortcuts.
    """
    handles = np.asarray(handles, dtype=np.float64).reshape(-1, 2)
    r0 = handles[0]
    offsets = handles - r0
    anchor = pivot_dense.point_at(tau_now)
    ahead = next_risky(tau_now, risky)
    kappa_min = kappa_step
    if ahead is not None:
        kappa_min = max(ahead[1] - tau_now + kappa_step, kappa_step)
    rng = np.random.default_rng(0) if rng is None else rng
    last_error = "no candidate lookahead"
    for kappa in np.arange(kappa_min, 1.0 - tau_now + 1e-9, kappa_step):
        target = pivot_dense.point_at(tau_now + kappa) + (r0 - anchor)
        if env.clearance(target) <= d0:
            last_error = "candidate target too close to obstacles"
            continue
        if any(env.clearance(target + off) <= d0 for off in offsets[1:]):
            last_error = "secondary handle target too close to obstacles"
            continue
        delta = min(d0, max(0.9 * env.clearance(r0), 0.25))
        cfg = PlannerConfig(iterations=800, step=20.0, delta=delta,
                            cost="length", goal_radius=5.0)
        try:
            ee = plan(r0, target, env, cfg, rng=rng)
        except (InvalidStart, InvalidGoal, NoPath, RejectionLimit) as exc:
            last_error = f"local planning failed: {exc}"
            continue
        if float(np.linalg.norm(ee.end - target)) > 1e-9:
            ee = Path(np.vstack([ee.nodes, target]))
        hi = min(tau_now + kappa, 1.0)
        if hi - tau_now <= 1e-9:
            last_error = "no parameter room ahead"
            continue
        segment = pivot_dense.subpath(tau_now, hi)
        if not pair_homotopic_like(segment, ee, env, resolution):
            last_error = "escape path winds differently than the pivot segment"
            continue
        # dense nodes so the nearest-node progress ratchet moves smoothly
        return EscapePlan(ee.densified(min_nodes=500), target, float(kappa), offsets)
    raise EscapeInfeasible(last_error)


# -- closed-loop tracker --------------------------------------------------------------


@dataclass
class TrackerConfig:
    xi: float = 0.02               # lookahead in path parameter
    gain: float = 0.6              # K_S
    fix_gain: float = 0.4          # K in final_fix
    v_max: float = 4.0             # px per control step
    probe: float = 2.0             # identification probe size
    eta: float = 0.3               # closed-loop Broyden damping
    budget: int = 4000             # step budget T
    finish_tol: float = 1.5        # max point error declaring success, px
    success_mode: str = "points"   # "points" | "feature"
    finish_pos: float = 2.0        # feature mode: position error bound, px
    finish_angle: float = 0.035    # feature mode: angle error bound, rad
    fix_radius: float = 20.0       # pivot distance switching to final_fix
    conflict_cos: float = -0.5
    min_nodes: int = 500
    hysteresis: int = 2
    margin: float = 0.03           # risky-segment halfwidth in tau
    stuck_streak: int = 6
    d0: float = 12.0               # escape target clearance
    escape_xi: float = 0.04        # lookahead along the escape path
    escape_done: float = 2.0       # handle-to-goal distance ending escape, px
    adjust_scale: float = 1.0      # constraint gain scale while adjusting
    stall_window: int = 50         # tracking steps without progress before re-probing
    stall_tol: float = 0.5         # final_fix: error decrease that counts as progress, px
    stall_tau: float = 0.002       # track_set: path-parameter advance that counts as progress
    constraints: ConstraintConfig = field(default_factory=ConstraintConfig)


@dataclass
class RunReport:
    success: bool
    reason: str
    steps: int
    final_error: float
    telemetry: list
    relaxed_intervals: list
    min_body_distance: float
    modes: list
    wall_time: float
    extras: dict = field(default_factory=dict)


def step_intervals(rows, pred) -> list:
    """Maximal [t_first, t_last] spans of telemetry rows satisfying pred."""
    out = []
    start = prev = None
    for row in rows:
        if pred(row):
            if start is None:
                start = row["t"]
            prev = row["t"]
        elif start is not None:
            out.append((start, prev))
            start = prev = None
    if start is not None:
        out.append((start, prev))
    return out


class Tracker:
    """Mode machine executing a path set on a plant.

    Modes: track_set (paths tracked at the pivot parameter), adjust_constraints
    (constraint commands only, counting the violation streak),
    track_ee_escape (direct end-effector path tracking, body constraints
    released), final_fix (targets pinned at the path ends).
    """

    def __init__(self, plant, path_set, env, cfg: TrackerConfig | None = None,
                 seed=None, feature: FeatureDef | None = None, y_d=None):
        self.plant = plant
        self.ps = path_set
        self.env = env
        self.cfg = cfg or TrackerConfig()
        self.rng = np.random.default_rng(seed)
        self.feature = feature
        self.y_d = None if y_d is None else np.asarray(y_d, dtype=np.float64).ravel()

        self.projector = SetProjector(path_set.paths, self.cfg.min_nodes,
                                      self.cfg.hysteresis)
        self.dense = self.projector.paths
        self.pivot = path_set.pivot
        self.targets = path_set.ends
        self.risky = risky_segments(self.dense[self.pivot], path_set.chords, env,
                                    self.cfg.margin)
        ccfg = self.cfg.constraints
        if ccfg.shape_center is None:
            ccfg.shape_center = shape_measure(plant.observe())

        self.jac = identify_jacobian(plant, self.cfg.probe)
        self.mode = "track_set"
        self.streak = 0
        self._stall_best = np.inf
        self._stall_wait = 0
        self.adjust_scale = self.cfg.adjust_scale
        self.escape: EscapePlan | None = None
        self.escape_proj = 0.0
        self.step_count = 0
        self.telemetry: list[dict] = []
        self.modes_seen = ["track_set"]
        self.min_body = np.inf

    # -- helpers

    def _target_error(self, points) -> float:
        return float(np.max(np.linalg.norm(points - self.targets, axis=1)))

    def _finished(self, points) -> bool:
        if (self.cfg.success_mode == "feature" and self.feature is not None
                and self.y_d is not None):
            diff = feature_eval(points, self.feature) - self.y_d
            if self.feature.kind == "point_angle":
                ang = abs(float(diff[2]))
                ang = min(ang, 2.0 * np.pi - ang)
                return (float(np.linalg.norm(diff[:2])) < self.cfg.finish_pos
                        and ang < self.cfg.finish_angle)
            return float(np.linalg.norm(diff)) < self.cfg.finish_pos
        return self._target_error(points) < self.cfg.finish_tol

    def _record(self, points, handles, taus, e_s, act, d_body, d_grip, violation):
        row = {
            "t": self.step_count,
            "mode": self.mode,
            "tau_pivot": float(taus[self.pivot]),
            "err_target": self._target_error(points),
            "err_track": float(np.max(np.linalg.norm(e_s, axis=1))) if e_s is not None else 0.0,
            "d_body": d_body,
            "d_gripper": d_grip,
            "streak": self.streak,
            "violation": int(violation),
            "a1": act.distance,
            "a2": act.gripper,
            "a3": act.shape,
        }
        for i, tau in enumerate(taus):
            row[f"tau_{i}"] = float(tau)
        flat_s = np.asarray(points).ravel()
        for i, v in enumerate(flat_s):
            row[f"s{i}"] = float(v)
        flat_r = np.asarray(handles).ravel()
        for i, v in enumerate(flat_r):
            row[f"r{i}"] = float(v)
        if self.feature is not None:
            y = feature_eval(points, self.feature)
            for i, v in enumerate(y):
                row[f"y{i}"] = float(v)
        self.telemetry.append(row)

    def _set_mode(self, mode: str):
        if mode != self.mode:
            self.mode = mode
            self.modes_seen.append(mode)
            self._stall_best = np.inf
            self._stall_wait = 0

    def _watch_stall(self, score: float, tol: float):
        """Re-probe the Jacobian when the progress score stops decreasing.

        A persistently wrong secant model shows up as a limit cycle: full-speed
        commands with no progress.  Fresh probes replace the drifted model with
        exact local secants.  ``score`` is -tau while tracking the path set
        (the ratchet is the progress measure) and the target error during the
        final fix.
        """
        if score < self._stall_best - tol:
            self._stall_best = score
            self._stall_wait = 0
            return
        self._stall_wait += 1
        if self._stall_wait >= self.cfg.stall_window:
            self.jac = identify_jacobian(self.plant, self.cfg.probe)
            self._stall_best = score
            self._stall_wait = 0

    # -- control step

    def step(self):
        if self.step_count >= self.cfg.budget:
            raise StepBudgetExhausted(f"no success within {self.cfg.budget} steps")
        self.step_count += 1
        cfg = self.cfg

        points = self.plant.observe()
        handles = self.plant.robot()
        taus, _ = self.projector.update(points, monotone=self.mode == "track_set")
        act = activate(points[self.pivot], self.dense[self.pivot], self.risky)
        witness = self.plant.body_witness() if hasattr(self.plant, "body_witness") else None
        channels = constraint_commands(points, handles, self.jac, self.env, act,
                                       cfg.constraints, witness, on_zero="clamp")
        d_body = channels.body_distance
        self.min_body = min(self.min_body, d_body)

        violation = act.distance > 0.0 and d_body < cfg.constraints.collision_threshold

        if self.mode in ("track_set", "adjust_constraints"):
            if violation:
                self._set_mode("adjust_constraints")
                self.streak += 1
                if self.streak >= cfg.stuck_streak:
                    try:
                        self.escape = plan_ee_escape(
                            handles, self.dense[self.pivot], float(taus[self.pivot]),
                            self.env, self.risky, cfg.d0, self.rng,
                        )
                        self.escape_proj = 0.0
                        self._set_mode("track_ee_escape")
                        self.streak = 0
                    except EscapeInfeasible:
                        self.adjust_scale *= 0.5
                        self.streak = 0
            else:
                if self.mode == "adjust_constraints":
                    self._set_mode("track_set")
                self.streak = 0

        e_s = None
        if self.mode == "track_set":
            if float(np.linalg.norm(points[self.pivot] - self.targets[self.pivot])) < cfg.fix_radius:
                self._set_mode("final_fix")

        if self.mode == "track_set":
            e_s, _ = tracking_error(points, self.dense, float(taus[self.pivot]),
                                    cfg.xi, self.pivot, cfg.conflict_cos)
            self._watch_stall(-float(taus[self.pivot]), cfg.stall_tau)
            motion = tracking_command(e_s, self.jac, cfg.gain, cfg.v_max)
        elif self.mode == "final_fix":
            e_s = points - self.targets
            self._watch_stall(float(np.max(np.linalg.norm(e_s, axis=1))),
                              cfg.stall_tol)
            motion = tracking_command(e_s, self.jac, cfg.fix_gain, cfg.v_max)
        elif self.mode == "track_ee_escape":
            ee = self.escape.path
            i = int(np.argmin(np.linalg.norm(ee.nodes - handles[0], axis=1)))
            self.escape_proj = max(self.escape_proj, float(ee.params[i]))
            ahead = ee.point_at(min(self.escape_proj + cfg.escape_xi, 1.0))
            step_vec = ahead - handles[0]
            motion = clamp_speed(np.tile(step_vec, len(handles)), cfg.v_max)
            if float(np.linalg.norm(handles[0] - self.escape.target)) < cfg.escape_done:
                self._set_mode("track_set")
                self.escape = None
                # the robot has relocated far from where the secant model was
                # valid; recalibrate before resuming deformation servoing
                self.jac = identify_jacobian(self.plant, cfg.probe)
        else:
            motion = np.zeros(2 * len(handles))

        if self.mode == "track_ee_escape":
            # body constraints are released while steering the robot directly;
            # the escape path carries its own clearance, so the gripper channel
            # only biases toward the passage center instead of gating motion
            command = channels.gripper + motion
        elif self.mode == "adjust_constraints":
            command = self.adjust_scale * constrained_command(channels)
        else:
            command = constrained_command(channels) + constraint_nullspace(channels) @ motion
        command = clamp_speed(command, cfg.v_max)

        s_new = self.plant.command(command).ravel()
        if self.mode != "track_ee_escape":
            # escape steps reposition the robot around a body pinned by
            # contact; their (command, zero response) pairs would only decay
            # the deformation model, so updates pause until tracking resumes
            try:
                self.jac = broyden_update(self.jac, command,
                                          s_new - points.ravel(), cfg.eta)
            except SkippedUpdate:
                pass

        self._record(points, handles, taus, e_s, act, d_body,
                     channels.gripper_distance, violation)
        return self._target_error(s_new.reshape(-1, 2))

    def run(self) -> RunReport:
        t0 = time.perf_counter()
        reason = "target reached"
        success = False
        while True:
            if self._finished(self.plant.observe()):
                success = True
                break
            try:
                self.step()
            except StepBudgetExhausted as exc:
                reason = str(exc)
                break
        final = self._target_error(self.plant.observe())
        return RunReport(
            success=success,
            reason=reason if not success else "target reached",
            steps=self.step_count,
            final_error=final,
            telemetry=self.telemetry,
            relaxed_intervals=list(self.risky),
            min_body_distance=float(self.min_body),
            modes=self.modes_seen,
            wall_time=time.perf_counter() - t0,
            extras={
                "violation_intervals": step_intervals(
                    self.telemetry, lambda r: r["violation"] > 0),
                "relaxed_c1_intervals": step_intervals(
                    self.telemetry,
                    lambda r: r["a1"] == 0.0 or r["mode"] == "track_ee_escape"),
            },
        )


# -- pure deformation-control baseline --------------------------------------------------


def pure_deformation_command(points, feat: FeatureDef, y_d, jac, gain: float,
                             v_max: float, damping: float = 0.1) -> np.ndarray:
    """Classical feature servoing r_dot = -(J_y J_d)^+ K (y - y_d), damped."""
    y = feature_eval(points, feat)
    e_y = gain * (y - np.asarray(y_d, dtype=np.float64).ravel())
    j = feature_jacobian(points, feat) @ jac
    cmd = -j.T @ np.linalg.solve(j @ j.T + damping**2 * np.eye(j.shape[0]), e_y)
    return clamp_speed(cmd, v_max)


def run_pure_control(plant, feat: FeatureDef, y_d, cfg: TrackerConfig | None = None,
                     feature_tol: float = 1.5) -> RunReport:
    """Track y_d directly with no planning or constraint handling."""
    cfg = cfg or TrackerConfig()
    t0 = time.perf_counter()
    jac = identify_jacobian(plant, cfg.probe)
    telemetry = []
    y_d = np.asarray(y_d, dtype=np.float64).ravel()
    success = False
    reason = "step budget exhausted"
    steps = 0
    for step_i in range(cfg.budget):
        points = plant.observe()
        y = feature_eval(points, feat)
        err = float(np.linalg.norm(y - y_d))
        row = {"t": step_i, "err_feature": err}
        for i, v in enumerate(y):
            row[f"y{i}"] = float(v)
        for i, v in enumerate(points.ravel()):
            row[f"s{i}"] = float(v)
        telemetry.append(row)
        if err < feature_tol:
            success = True
            reason = "feature reached"
            steps = step_i
            break
        cmd = pure_deformation_command(points, feat, y_d, jac, cfg.gain, cfg.v_max)
        s_new = plant.command(cmd).ravel()
        try:
            jac = broyden_update(jac, cmd, s_new - points.ravel(), cfg.eta)
        except SkippedUpdate:
            pass
        steps = step_i + 1
    final_points = plant.observe()
    final = float(np.linalg.norm(feature_eval(final_points, feat) - y_d))
    return RunReport(
        success=success, reason=reason, steps=steps, final_error=final,
        telemetry=telemetry, relaxed_intervals=[], min_body_distance=np.inf,
        modes=["pure"], wall_time=time.perf_counter() - t0,
    )
