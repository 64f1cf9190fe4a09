"""SVG rendering of environments, path sets, and executed runs.

Documents are built with ElementTree so the output is always well-formed XML.
Coordinates are written with fixed precision to keep re-renders byte-stable.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

OBSTACLE_FILL = "#9e9e9e"
OBSTACLE_EDGE = "#616161"
PASSAGE_COLOR = "#757575"
PIVOT_COLOR = "#2e7d32"
TRANSFER_COLOR = "#1565c0"
REPOSITION_COLOR = "#c62828"
TRAJECTORY_COLOR = "#6a1b9a"
HANDLE_COLOR = "#ef6c00"


def _fmt(v) -> str:
    return f"{float(v):.2f}"


def _pts(points) -> str:
    return " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in np.asarray(points))


class SvgCanvas:
    """Minimal drawing surface for one document."""

    def __init__(self, width: float, height: float):
        self.root = ET.Element(
            "svg",
            {
                "xmlns": "http://www.w3.org/2000/svg",
                "width": _fmt(width),
                "height": _fmt(height),
                "viewBox": f"0 0 {_fmt(width)} {_fmt(height)}",
            },
        )
        ET.SubElement(
            self.root, "rect",
            {"x": "0", "y": "0", "width": _fmt(width), "height": _fmt(height),
             "fill": "#ffffff", "stroke": "#424242", "stroke-width": "1"},
        )

    def polygon(self, points, fill: str, stroke: str = "none", width: float = 1.0):
        ET.SubElement(
            self.root, "polygon",
            {"points": _pts(points), "fill": fill, "stroke": stroke,
             "stroke-width": _fmt(width)},
        )

    def polyline(self, points, stroke: str, width: float = 1.5, dash: str | None = None):
        at = {"points": _pts(points), "fill": "none", "stroke": stroke,
              "stroke-width": _fmt(width)}
        if dash:
            at["stroke-dasharray"] = dash
        ET.SubElement(self.root, "polyline", at)

    def line(self, a, b, stroke: str, width: float = 1.0, dash: str | None = None):
        at = {"x1": _fmt(a[0]), "y1": _fmt(a[1]), "x2": _fmt(b[0]), "y2": _fmt(b[1]),
              "stroke": stroke, "stroke-width": _fmt(width)}
        if dash:
            at["stroke-dasharray"] = dash
        ET.SubElement(self.root, "line", at)

    def circle(self, center, radius: float, fill: str):
        ET.SubElement(
            self.root, "circle",
            {"cx": _fmt(center[0]), "cy": _fmt(center[1]), "r": _fmt(radius),
             "fill": fill},
        )

    def tostring(self) -> str:
        return ET.tostring(self.root, encoding="unicode", xml_declaration=True)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.tostring())
            fh.write("\n")


def draw_environment(canvas: SvgCanvas, env):
    for obstacle in env.obstacles:
        canvas.polygon(obstacle.vertices, OBSTACLE_FILL, OBSTACLE_EDGE)
    for passage in env.passages:
        canvas.line(passage.segment[0], passage.segment[1], PASSAGE_COLOR,
                    width=1.2, dash="6 4")


def render_plan(env, path, out, start=None, goal=None) -> None:
    """Planner figure: environment plus one colored path."""
    canvas = SvgCanvas(env.workspace.width, env.workspace.height)
    draw_environment(canvas, env)
    canvas.polyline(path.nodes, PIVOT_COLOR, width=2.0)
    canvas.circle(start if start is not None else path.start, 4.0, PIVOT_COLOR)
    canvas.circle(goal if goal is not None else path.end, 4.0, REPOSITION_COLOR)
    canvas.save(out)


def render_path_set(env, ps, out, report=None) -> None:
    """Path-set figure: pivot in green, transferred paths in blue, and the
    repositioning mapping (when any) as red segments."""
    canvas = SvgCanvas(env.workspace.width, env.workspace.height)
    draw_environment(canvas, env)
    for i, path in enumerate(ps.paths):
        if i != ps.pivot:
            canvas.polyline(path.nodes, TRANSFER_COLOR, width=1.6)
    canvas.polyline(ps.paths[ps.pivot].nodes, PIVOT_COLOR, width=2.2)
    if report is not None and report.pivot_before is not None:
        for tau, shift in report.repositioning:
            a = report.pivot_before.point_at(float(tau))
            canvas.line(a, a + np.asarray(shift), REPOSITION_COLOR, width=2.0)
            canvas.circle(a, 2.5, REPOSITION_COLOR)
    for path in ps.paths:
        canvas.circle(path.start, 3.0, "#000000")
        canvas.circle(path.end, 3.0, REPOSITION_COLOR)
    canvas.save(out)


def _trajectory_columns(rows, prefix: str) -> np.ndarray | None:
    if not rows:
        return None
    n = 0
    while f"{prefix}{n}" in rows[0]:
        n += 1
    if n == 0:
        return None
    data = np.array([[row[f"{prefix}{i}"] for i in range(n)] for row in rows])
    return data.reshape(len(rows), n // 2, 2)


def render_run(env, ps, telemetry, out) -> None:
    """Run figure: the path set plus executed feedback and handle traces."""
    canvas = SvgCanvas(env.workspace.width, env.workspace.height)
    draw_environment(canvas, env)
    for i, path in enumerate(ps.paths):
        color = PIVOT_COLOR if i == ps.pivot else TRANSFER_COLOR
        canvas.polyline(path.nodes, color, width=1.2, dash="2 3")
    feedback = _trajectory_columns(telemetry, "s")
    if feedback is not None:
        for k in range(feedback.shape[1]):
            canvas.polyline(feedback[:, k], TRAJECTORY_COLOR, width=1.6)
            canvas.circle(feedback[-1, k], 3.0, TRAJECTORY_COLOR)
    handles = _trajectory_columns(telemetry, "r")
    if handles is not None:
        for k in range(handles.shape[1]):
            canvas.polyline(handles[:, k], HANDLE_COLOR, width=1.0, dash="4 3")
    for path in ps.paths:
        canvas.circle(path.end, 3.0, REPOSITION_COLOR)
    canvas.save(out)
