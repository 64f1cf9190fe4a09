"""Scenario files.

A scenario is a versioned JSON document (``"schema": 1``) bundling everything
one run needs: workspace and obstacles, a deformable body, the task feature
with its desired value, and per-module configuration overrides.  Lengths are
in px; angle-valued entries are written in degrees and converted to radians
on load.  Canned scenarios ship as package data and are resolved by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .control import ConstraintConfig, TrackerConfig
from .errors import ScenarioError
from .geometry import Environment, Obstacle, Workspace
from .planner import PlannerConfig
from .sim import DeformableBody, SpringPlant, chain_body, grid_body, polyline_body
from .targeting import FeatureDef
from .transfer import TransferOptions

_TOP_KEYS = {
    "schema", "name", "description", "workspace", "obstacles", "body",
    "feature", "y_d", "points", "targets", "pivot", "trade_off",
    "shape_bounds", "planner", "transfer", "control", "sim", "seed",
}

# angle-valued config fields, stored as degrees in files
_DEGREE_FIELDS = {"finish_angle"}


def _require(cond: bool, msg: str):
    if not cond:
        raise ScenarioError(msg)


def _as_points(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    _require(arr.ndim == 2 and arr.shape[1] == 2 and len(arr) >= 1,
             f"{what}: expected a list of [x, y] pairs")
    _require(bool(np.isfinite(arr).all()), f"{what}: non-finite coordinate")
    return arr


def _config_from(data: dict, cls, what: str):
    """Build a config dataclass from a JSON mapping, rejecting unknown keys."""
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        _require(key in known, f"{what}: unknown option {key!r}")
        if key == "constraints":
            _require(isinstance(value, dict), f"{what}.constraints: expected an object")
            value = _config_from(value, ConstraintConfig, f"{what}.constraints")
        elif key in _DEGREE_FIELDS:
            value = float(np.radians(value))
        kwargs[key] = value
    return cls(**kwargs)


@dataclass
class Scenario:
    """Parsed scenario, ready to build the environment, plant, and configs."""

    name: str
    seed: int
    env: Environment
    body: DeformableBody | None
    feature: FeatureDef | None
    y_d: np.ndarray | None
    points: np.ndarray | None
    targets: np.ndarray | None
    pivot: int | None
    trade_off: float
    shape_bounds: float
    planner: PlannerConfig
    transfer: TransferOptions
    control: TrackerConfig
    relax_iters: int
    damping: float
    raw: dict = field(repr=False)
    source: str | None = None

    def make_plant(self) -> SpringPlant:
        _require(self.body is not None, f"scenario {self.name!r} declares no body")
        return SpringPlant(self.body, self.env, self.relax_iters, self.damping)

    def start_points(self, plant: SpringPlant | None = None) -> np.ndarray:
        """Initial feedback-point distribution S_0."""
        if self.points is not None:
            return self.points.copy()
        if plant is None:
            plant = self.make_plant()
        return plant.observe()

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))


def _parse_body(data: dict) -> DeformableBody:
    _require(isinstance(data, dict), "body: expected an object")
    topology = data.get("topology", "chain")
    grasp = data.get("grasp", "ends")
    feedback = data.get("feedback")
    stiffness = float(data.get("stiffness", 1.0))
    try:
        if topology == "chain":
            return chain_body(data["start"], data["end"], int(data["n"]),
                              grasp, feedback, stiffness,
                              float(data.get("bend_stiffness", 0.3)))
        if topology == "polyline":
            return polyline_body(_as_points(data["nodes"], "body.nodes"),
                                 grasp, feedback, stiffness,
                                 float(data.get("bend_stiffness", 0.3)),
                                 tuple(data.get("anchors", ())))
        if topology == "grid":
            return grid_body(data["origin"], data["size"], data["shape"],
                             grasp, feedback, stiffness,
                             float(data.get("shear_stiffness", 0.5)))
    except KeyError as exc:
        raise ScenarioError(f"body: missing field {exc.args[0]!r}") from None
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"body: {exc}") from None
    raise ScenarioError(f"body: unknown topology {topology!r}")


def _parse_feature(data: dict, n_feedback: int | None) -> FeatureDef:
    _require(isinstance(data, dict), "feature: expected an object")
    kind = data.get("kind")
    _require(kind in ("single_point", "point_angle", "direct"),
             f"feature: unsupported kind {kind!r} in a scenario file")
    point = data.get("point")
    angle = data.get("angle")
    points = data.get("points")
    if kind in ("single_point", "point_angle"):
        _require(isinstance(point, int), "feature: 'point' index required")
    if kind == "point_angle":
        _require(isinstance(angle, (list, tuple)) and len(angle) == 3,
                 "feature: 'angle' must list three point indices")
        angle = tuple(int(i) for i in angle)
        _require(angle[1] == point, "feature: 'point' must be the angle vertex")
    if points is not None:
        points = tuple(int(i) for i in points)
    if n_feedback is not None:
        referenced = [i for i in (point,) if i is not None]
        referenced += list(angle or ()) + list(points or ())
        for i in referenced:
            _require(0 <= i < n_feedback,
                     f"feature: point index {i} outside the {n_feedback} feedback points")
    return FeatureDef(kind=kind, point=point, angle=angle, points=points)


def _parse_y_d(value, feat: FeatureDef | None, n_feedback: int | None) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64).ravel()
    _require(bool(np.isfinite(arr).all()), "y_d: non-finite entry")
    if feat is not None:
        if feat.kind == "point_angle":
            _require(arr.size == 3, "y_d: point_angle expects [x, y, angle_deg]")
            arr = arr.copy()
            arr[2] = np.radians(arr[2])
        elif feat.kind == "single_point":
            _require(arr.size == 2, "y_d: single_point expects [x, y]")
        elif feat.kind == "direct" and n_feedback is not None:
            _require(arr.size == feat.dim(n_feedback),
                     f"y_d: direct feature expects {feat.dim(n_feedback)} values")
    return arr


def parse_scenario(doc: dict, name: str = "<inline>", source: str | None = None) -> Scenario:
    _require(isinstance(doc, dict), "scenario: expected a JSON object")
    _require(doc.get("schema") == 1,
             f"scenario: unsupported schema {doc.get('schema')!r} (expected 1)")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"scenario: unknown keys {sorted(unknown)}")
    _require("seed" in doc and isinstance(doc["seed"], int),
             "scenario: integer 'seed' is required")

    ws_data = doc.get("workspace", {})
    workspace = Workspace(float(ws_data.get("width", 640.0)),
                          float(ws_data.get("height", 480.0)))
    obstacles = []
    for entry in doc.get("obstacles", ()):
        _require(isinstance(entry, dict) and "id" in entry and "vertices" in entry,
                 "obstacles: each entry needs 'id' and 'vertices'")
        obstacles.append(Obstacle(int(entry["id"]), entry["vertices"]))
    env = Environment(workspace, obstacles)

    body = _parse_body(doc["body"]) if "body" in doc else None
    n_feedback = len(body.feedback) if body is not None else None
    if body is None and "points" in doc:
        n_feedback = len(_as_points(doc["points"], "points"))

    feature = _parse_feature(doc["feature"], n_feedback) if "feature" in doc else None
    y_d = _parse_y_d(doc["y_d"], feature, n_feedback) if "y_d" in doc else None
    points = _as_points(doc["points"], "points") if "points" in doc else None
    targets = _as_points(doc["targets"], "targets") if "targets" in doc else None
    if points is not None and targets is not None:
        _require(len(points) == len(targets), "points/targets: length mismatch")

    pivot = doc.get("pivot")
    if pivot is not None:
        _require(isinstance(pivot, int) and n_feedback is not None
                 and 0 <= pivot < n_feedback, "pivot: index outside the feedback points")

    sim_data = doc.get("sim", {})
    return Scenario(
        name=doc.get("name", name),
        seed=int(doc["seed"]),
        env=env,
        body=body,
        feature=feature,
        y_d=y_d,
        points=points,
        targets=targets,
        pivot=pivot,
        trade_off=float(doc.get("trade_off", 0.5)),
        shape_bounds=float(doc.get("shape_bounds", 0.02)),
        planner=_config_from(doc.get("planner", {}), PlannerConfig, "planner"),
        transfer=_config_from(doc.get("transfer", {}), TransferOptions, "transfer"),
        control=_config_from(doc.get("control", {}), TrackerConfig, "control"),
        relax_iters=int(sim_data.get("relax_iters", 150)),
        damping=float(sim_data.get("damping", 0.5)),
        raw=doc,
        source=source,
    )


def available_scenarios() -> list[str]:
    """Names of the canned scenarios shipped with the package."""
    root = resources.files(__package__) / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(src) -> Scenario:
    """Load a scenario from a dict, a file path, or a canned-scenario name."""
    if isinstance(src, dict):
        return parse_scenario(src)
    text_source = str(src)
    path = Path(text_source)
    if path.suffix == ".json" or path.exists():
        _require(path.exists(), f"scenario file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
        return parse_scenario(doc, name=path.stem, source=str(path))
    name = text_source
    res = resources.files(__package__) / "scenarios" / f"{name}.json"
    if not res.is_file():
        raise ScenarioError(
            f"unknown scenario {name!r}; canned: {', '.join(available_scenarios())}")
    doc = json.loads(res.read_text())
    return parse_scenario(doc, name=name, source=f"pathset://scenarios/{name}.json")
