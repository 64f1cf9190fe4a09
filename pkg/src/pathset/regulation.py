"""Constraint regulation along a planned path set.

Where the free corridor around the pivot path is narrower than the path-set
chord, the set must squeeze to pass; those parameter stretches are marked
risky and the body-obstacle constraint is released there (and only there) so
the squeeze is not fought by the controller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTangent
from .planner import path_passage_list


def local_path_width(path, tau: float, env) -> float:
    """Free-corridor width across the path at tau, measured normal to it."""
    pt = path.point_at(tau)
    d = path.direction_at(tau)
    if not np.isfinite(d).all() or np.linalg.norm(d) < 1e-12:
        raise DegenerateTangent(f"no tangent at tau={tau}")
    n = np.array([-d[1], d[0]])
    return env.ray_free_length(pt, n) + env.ray_free_length(pt, -n)


def width_profile(path, env, samples: int = 200):
    """(taus, widths) sampled uniformly in path parameter."""
    taus = np.linspace(0.0, 1.0, samples)
    widths = np.array([local_path_width(path, t, env) for t in taus])
    return taus, widths


def _merge(intervals):
    if not intervals:
        return []
    intervals = sorted(intervals)
    out = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def risky_segments(pivot_path, chords: dict[int, float], env,
                   margin: float = 0.03) -> list[tuple[float, float]]:
    """Parameter intervals around passage crossings the set cannot clear.

    A crossing is risky when the passage is no wider than the path-set chord
    recorded for it; each one contributes the clipped window
    [tau - margin, tau + margin], overlaps merged.
    """
    raw = []
    for rec in path_passage_list(pivot_path, env):
        chord = chords.get(rec.index)
        if chord is None:
            continue
        if env.passages[rec.index].width <= chord:
            raw.append((max(rec.tau - margin, 0.0), min(rec.tau + margin, 1.0)))
    return _merge(raw)


def in_risky(tau: float, intervals) -> bool:
    return any(lo <= tau <= hi for lo, hi in intervals)


def next_risky(tau: float, intervals):
    """Interval containing tau or the first one ahead of it, else None."""
    for lo, hi in intervals:
        if hi >= tau:
            return (lo, hi)
    return None


@dataclass(frozen=True)
class Activation:
    """Gates for the three constraint channels.

    distance: body-obstacle separation, released inside risky stretches.
    gripper:  robot-obstacle repulsion, always on.
    shape:    deformation-extent regulation, released during execution and
              re-imposed for the target check.
    """

    distance: float
    gripper: float
    shape: float

    def vector(self) -> np.ndarray:
        return np.array([self.distance, self.gripper, self.shape])


def activate(pivot_now, pivot_path, intervals, phase: str = "execution") -> Activation:
    """Activation vector for the current pivot position.

    The nominal rule assumes perfect tracking; here the actual pivot position
    is projected onto the path first.
    """
    if phase == "target":
        return Activation(1.0, 1.0, 1.0)
    p = np.asarray(pivot_now, dtype=np.float64)
    i = int(np.argmin(np.linalg.norm(pivot_path.nodes - p, axis=1)))
    tau = float(pivot_path.params[i])
    a1 = 0.0 if in_risky(tau, intervals) else 1.0
    return Activation(distance=a1, gripper=1.0, shape=0.0)
