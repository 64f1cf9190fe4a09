"""Exception taxonomy shared across the toolkit."""


class PathsetError(Exception):
    """Base class for every error raised by this package."""


class ScenarioError(PathsetError):
    """Scenario file missing, malformed, or failing schema validation."""


class InvalidObstacle(PathsetError):
    """Obstacle polygon is degenerate (too few vertices, zero area, concave)."""


class InvalidEnvironment(PathsetError):
    """Environment-level invariant violated (overlapping obstacles, duplicate ids)."""


class PlanningError(PathsetError):
    """Base class for planner failures."""


class InvalidStart(PlanningError):
    """Start configuration lies outside the required free-space interior."""


class InvalidGoal(PlanningError):
    """Goal configuration lies outside the required free-space interior."""


class NoPath(PlanningError):
    """Planner exhausted its iteration budget without reaching the goal disk."""


class RejectionLimit(PlanningError):
    """Free-space sampler exceeded its consecutive-rejection budget."""


class PathError(PathsetError):
    """Base class for path and path-set construction failures."""


class EndpointMismatch(PathError):
    """Concatenation or homotopy check called on paths whose endpoints disagree."""


class ConcatenationInfeasible(PathError):
    """Closing segment of a transferred path collides with an obstacle."""


class MissingCrossing(PathError):
    """A path never crosses the passage line it is expected to cross."""


class CenteringInfeasible(PathError):
    """No repositioning shift keeps the crossing inside the passage interior."""


class TransferInfeasible(PathError):
    """Transferred path cannot be made collision-free within the anchor budget."""


class TargetError(PathsetError):
    """Base class for target-determination failures."""


class DegenerateAngle(TargetError):
    """Angle feature evaluated on a configuration with a zero-length side."""


class NoFeasibleTarget(TargetError):
    """No collision-free target configuration satisfies the feature equality."""


class DegenerateTangent(PathsetError):
    """Local path width queried where the path has no usable tangent."""


class ControlError(PathsetError):
    """Base class for runtime tracking failures."""


class SkippedUpdate(ControlError):
    """Jacobian update skipped because the command increment was too small."""


class ZeroDistance(ControlError):
    """A constraint distance reached zero; the run is already in collision."""


class StepBudgetExhausted(ControlError):
    """Tracking loop hit its step budget before meeting the target tolerance."""


class EscapeInfeasible(ControlError):
    """No feasible escape path found past the active risky interval."""
