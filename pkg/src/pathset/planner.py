"""Sampling planner over the delta-interior of free space.

Costs come in two modes.  ``length`` is ordinary cumulative length; the
``composite`` mode divides cumulative length by the smallest passage width the
root-to-node chain has crossed, truncated upward to the workspace diagonal
when nothing was crossed and downward to a tiny epsilon when the width falls
at or below the configured minimum requirement.  Rewiring keeps both the
cumulative length and the minimum crossed width consistent along every
subtree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidGoal, InvalidStart, NoPath, RejectionLimit
from .paths import Path


@dataclass
class PlannerConfig:
    iterations: int = 3000
    step: float = 15.0
    neighbor_radius: float | None = None  # 2.5 * step when None
    delta: float = 2.0                    # required clearance, px
    goal_radius: float = 15.0
    goal_bias: float = 0.05
    cost: str = "composite"               # "composite" | "length"
    eps_top: float | None = None          # cost width with no crossing; workspace diagonal when None
    eps_bottom: float = 1e-3              # cost width below the requirement
    min_width_requirement: float = 0.0
    rejection_limit: int = 100_000

    def resolved_radius(self) -> float:
        return self.neighbor_radius if self.neighbor_radius is not None else 2.5 * self.step


@dataclass
class PassageRecord:
    """One passage crossing of a path: which passage, where along the path."""

    index: int
    tau: float
    point: np.ndarray


def sample_free(env, delta: float, rng, limit: int = 100_000) -> np.ndarray:
    """Uniform sample of the delta-interior by rejection."""
    w, h = env.workspace.width, env.workspace.height
    for _ in range(limit):
        p = rng.random(2) * (w, h)
        if env.clearance(p) >= delta:
            return p
    raise RejectionLimit(f"no free sample after {limit} draws (delta={delta})")


class _Tree:
    def __init__(self, cap: int, start, eps_top: float):
        self.xs = np.empty(cap)
        self.ys = np.empty(cap)
        self.pos = np.empty((cap, 2))
        self.parent = np.full(cap, -1, dtype=np.int64)
        self.length = np.zeros(cap)
        self.minw = np.empty(cap)
        self.cost = np.zeros(cap)
        self.edge_len = np.zeros(cap)
        self.edge_minw = np.full(cap, np.inf)
        self.children: list[list[int]] = [[]]
        self.pos[0] = start
        self.xs[0], self.ys[0] = start
        self.minw[0] = eps_top
        self.n = 1

    def add(self, p, parent: int, elen: float, eminw: float, length: float,
            minw: float, cost: float) -> int:
        i = self.n
        self.pos[i] = p
        self.xs[i], self.ys[i] = p
        self.parent[i] = parent
        self.edge_len[i] = elen
        self.edge_minw[i] = eminw
        self.length[i] = length
        self.minw[i] = minw
        self.cost[i] = cost
        self.children[parent].append(i)
        self.children.append([])
        self.n += 1
        return i


def _truncated_width(minw: float, cfg: PlannerConfig) -> float:
    if minw <= cfg.min_width_requirement:
        return cfg.eps_bottom
    return minw


def _node_cost(length: float, minw: float, cfg: PlannerConfig) -> float:
    if cfg.cost == "length":
        return length
    return length / _truncated_width(minw, cfg)


def update_node_cost(parent_length: float, parent_minw: float, edge_length: float,
                     edge_minw: float, cfg: PlannerConfig):
    """Child bookkeeping for one candidate edge.

    Returns (length, min_width, cost): cumulative length, minimum passage
    width over the whole chain, and the configured cost of the child.
    """
    length = parent_length + edge_length
    minw = min(parent_minw, edge_minw)
    return length, minw, _node_cost(length, minw, cfg)


def plan(start, goal, env, cfg: PlannerConfig | None = None, seed=None, rng=None) -> Path:
    """Grow a tree from start and return the best path into the goal disk."""
    cfg = cfg or PlannerConfig()
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(seed)
    delta = cfg.delta
    if env.clearance(start) < delta:
        raise InvalidStart(f"start clearance below delta={delta}")
    if env.clearance(goal) < delta:
        raise InvalidGoal(f"goal clearance below delta={delta}")
    eps_top = cfg.eps_top if cfg.eps_top is not None else env.workspace.diagonal
    r_near = cfg.resolved_radius()
    tree = _Tree(cfg.iterations + 1, start, eps_top)
    goal_hits: list[int] = []

    for _ in range(cfg.iterations):
        if rng.random() < cfg.goal_bias:
            q = goal
        else:
            q = sample_free(env, delta, rng, cfg.rejection_limit)
        ni = kernels.nearest_index(tree.xs, tree.ys, tree.n, q[0], q[1])
        npos = tree.pos[ni]
        diff = q - npos
        d = float(np.hypot(diff[0], diff[1]))
        if d < 1e-12:
            continue
        new = npos + (min(cfg.step, d) / d) * diff
        if not env.segment_free(npos, new, delta):
            continue
        idxs = kernels.radius_indices(tree.xs, tree.ys, tree.n, new[0], new[1], r_near)
        cand = tree.pos[idxs]
        ends = np.broadcast_to(new, cand.shape)
        clear = env.segments_clearance(cand, ends)
        ew = env.edges_min_crossed_width(cand, ends)
        elen = np.linalg.norm(cand - new, axis=1)
        feasible = clear >= delta

        best_k = -1
        best = (np.inf, np.inf, np.inf)
        for k in range(len(idxs)):
            if not feasible[k]:
                continue
            i = int(idxs[k])
            trip = update_node_cost(
                tree.length[i], tree.minw[i], float(elen[k]), float(ew[k]), cfg
            )
            if trip[2] < best[2]:
                best = trip
                best_k = k
        if best_k < 0:
            continue
        nidx = tree.add(
            new, int(idxs[best_k]), float(elen[best_k]), float(ew[best_k]),
            best[0], best[1], best[2],
        )

        for k in range(len(idxs)):
            i = int(idxs[k])
            if i == tree.parent[nidx] or not feasible[k]:
                continue
            length, minw, cost = update_node_cost(
                tree.length[nidx], tree.minw[nidx], float(elen[k]), float(ew[k]), cfg
            )
            if cost < tree.cost[i] - 1e-12:
                tree.children[tree.parent[i]].remove(i)
                tree.parent[i] = nidx
                tree.children[nidx].append(i)
                tree.edge_len[i] = float(elen[k])
                tree.edge_minw[i] = float(ew[k])
                tree.length[i] = length
                tree.minw[i] = minw
                tree.cost[i] = cost
                stack = list(tree.children[i])
                while stack:
                    m = stack.pop()
                    p = tree.parent[m]
                    tree.length[m] = tree.length[p] + tree.edge_len[m]
                    tree.minw[m] = min(tree.minw[p], tree.edge_minw[m])
                    tree.cost[m] = _node_cost(tree.length[m], tree.minw[m], cfg)
                    stack.extend(tree.children[m])

        if np.linalg.norm(new - goal) <= cfg.goal_radius:
            goal_hits.append(nidx)

    if not goal_hits:
        raise NoPath(f"goal disk not reached in {cfg.iterations} iterations")
    best_i = min(goal_hits, key=lambda i: (tree.cost[i], i))
    chain = []
    i = best_i
    while i >= 0:
        chain.append(tree.pos[i])
        i = int(tree.parent[i])
    return Path(np.vstack(chain[::-1]))


def path_passage_list(path: Path, env) -> list[PassageRecord]:
    """Ordered passage crossings of a path (witness-segment intersections).

    A crossing is a side change of the path against the passage line whose
    intersection point falls inside the witness segment.  Nodes exactly on
    the line (offset below 1e-9) belong to neither side; a crossing through
    such a node is anchored at the node itself.
    """
    recs = []
    nodes, cum = path.nodes, path.cum
    for pi, psg in enumerate(env.passages):
        f = (nodes - psg.segment[0]) @ psg.normal
        f = np.where(np.abs(f) < 1e-9, 0.0, f)
        last_sign = 0.0
        last_idx = -1
        for i in range(len(f)):
            sign = float(np.sign(f[i]))
            if sign == 0.0:
                continue
            if last_sign != 0.0 and sign != last_sign:
                if i == last_idx + 1:
                    t = f[last_idx] / (f[last_idx] - f[i])
                    point = nodes[last_idx] + t * (nodes[i] - nodes[last_idx])
                    arc = cum[last_idx] + t * (cum[i] - cum[last_idx])
                else:
                    point = nodes[last_idx + 1]
                    arc = cum[last_idx + 1]
                s_coord = psg.coord(point)
                if 0.0 < s_coord < psg.width:
                    recs.append(PassageRecord(
                        index=pi, tau=float(arc / path.length), point=point))
            last_sign = sign
            last_idx = i
    recs.sort(key=lambda r: r.tau)
    return recs


def path_cost(path: Path, env, cfg: PlannerConfig) -> float:
    """Cost of a whole path under the configured mode (for analysis/tests)."""
    if cfg.cost == "length":
        return path.length
    recs = path_passage_list(path, env)
    eps_top = cfg.eps_top if cfg.eps_top is not None else env.workspace.diagonal
    minw = min((env.passages[r.index].width for r in recs), default=eps_top)
    return path.length / _truncated_width(minw, cfg)
