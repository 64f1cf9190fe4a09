"""Planning and feedback control of feedback-point path sets in planar
workspaces with passages.

The pipeline: detect passages between obstacles, plan a pivot path with a
passage-aware cost, transfer it to every feedback point (rigidly when the
clearance assumptions hold, with repositioning and chord compression when
they do not), determine a feasible target distribution from the task feature,
and track the certified path set in closed loop with obstacle-distance,
gripper, and shape constraints that activate and release along the way.
"""

from .control import RunReport, Tracker, TrackerConfig, run_pure_control
from .errors import PathsetError, ScenarioError
from .geometry import Environment, Obstacle, Passage, Workspace, detect_passages
from .paths import Certificate, Path, PathSet
from .planner import PlannerConfig, plan
from .scenarios import Scenario, available_scenarios, load_scenario
from .sim import DeformableBody, SpringPlant, chain_body, grid_body, polyline_body
from .targeting import FeatureDef, determine_target
from .transfer import TransferOptions, generate_path_set

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "DeformableBody",
    "Environment",
    "FeatureDef",
    "Obstacle",
    "Passage",
    "Path",
    "PathSet",
    "PathsetError",
    "PlannerConfig",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "SpringPlant",
    "Tracker",
    "TrackerConfig",
    "TransferOptions",
    "Workspace",
    "available_scenarios",
    "chain_body",
    "detect_passages",
    "determine_target",
    "generate_path_set",
    "grid_body",
    "load_scenario",
    "plan",
    "polyline_body",
    "run_pure_control",
    "__version__",
]
