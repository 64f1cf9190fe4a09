"""Command line entry points: plan, transfer, track, bench.

Exit codes are a stable contract: 0 on success, 2 on a domain failure (no
path, infeasible transfer, exhausted step budget), 3 on input errors
(unknown scenario, schema violations, bad flags).  ``PATHSET_LOG`` sets the
log level.  Angle-valued numbers in files are degrees.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path as FsPath

import numpy as np

from .control import Tracker, run_pure_control
from .errors import PathsetError, ScenarioError
from .planner import path_passage_list, plan
from .regulation import width_profile
from .scenarios import available_scenarios, load_scenario
from .svgout import render_path_set, render_plan, render_run
from .targeting import determine_target, feature_eval
from .transfer import generate_path_set

_LOG = logging.getLogger("pathset")


def _setup_logging():
    name = os.environ.get("PATHSET_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _out_dir(args, scenario_name: str) -> FsPath:
    out = FsPath(args.out) if args.out else FsPath("runs") / scenario_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_telemetry(rows, path) -> None:
    """CSV dump with fixed float formatting, byte-stable for equal inputs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if not rows:
            return
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_value(row.get(k, "")) for k in header])


def write_width_profile(taus, widths, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tau", "width"])
        for tau, width in zip(taus, widths):
            writer.writerow([f"{tau:.6f}", f"{width:.6f}"])


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _resolve_targets(sc, s0, seed):
    """Target distribution and pivot index for a scenario."""
    if sc.targets is not None:
        pivot = sc.pivot if sc.pivot is not None else 0
        return sc.targets, pivot
    if sc.feature is None or sc.y_d is None:
        raise ScenarioError(
            f"scenario {sc.name!r} gives neither targets nor a feature with y_d")
    result = determine_target(s0, sc.feature, sc.y_d, sc.env, sc.trade_off,
                              sc.transfer.delta_min, seed=seed)
    pivot = sc.pivot if sc.pivot is not None else result.pivot
    return result.distribution, pivot


def cmd_plan(args) -> int:
    sc = load_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    s0 = sc.start_points()
    sd, pivot = _resolve_targets(sc, s0, seed)
    cfg = sc.planner if args.cost is None else replace(sc.planner, cost=args.cost)
    _LOG.info("planning %s with %s cost, seed %d", sc.name, cfg.cost, seed)
    t0 = time.perf_counter()
    path = plan(s0[pivot], sd[pivot], sc.env, cfg, seed=seed)
    elapsed = time.perf_counter() - t0
    crossings = path_passage_list(path, sc.env)
    min_width = min((sc.env.passages[r.index].width for r in crossings),
                    default=float("inf"))
    out = _out_dir(args, sc.name)
    render_plan(sc.env, path, out / "plan.svg", s0[pivot], sd[pivot])
    write_width_profile(*width_profile(path, sc.env), out / "widths.csv")
    print(f"scenario={sc.name} cost={cfg.cost} length={path.length:.2f} "
          f"min_width={min_width:.2f} crossings={len(crossings)} "
          f"time={elapsed:.2f}s out={out / 'plan.svg'}")
    return 0


def cmd_transfer(args) -> int:
    sc = load_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    s0 = sc.start_points()
    sd, pivot = _resolve_targets(sc, s0, seed)
    t0 = time.perf_counter()
    ps, report = generate_path_set(s0, sd, pivot, sc.env, sc.planner, sc.transfer, seed)
    elapsed = time.perf_counter() - t0
    out = _out_dir(args, sc.name)
    render_path_set(sc.env, ps, out / "transfer.svg", report)
    cert = {
        "scenario": sc.name,
        "seed": seed,
        "branch": ps.certificate.branch,
        "strong_homotopic_like": ps.certificate.strong_homotopic_like,
        "resolution": ps.certificate.resolution,
        "paths": len(ps.paths),
        "pivot": ps.pivot,
        "delta_p": report.delta_p,
        "assumptions_hold": report.holds(),
        "chords": {str(k): v for k, v in ps.chords.items()},
        "time": elapsed,
    }
    with open(out / "certificate.json", "w") as fh:
        json.dump(_json_ready(cert), fh, indent=2)
        fh.write("\n")
    print(f"scenario={sc.name} branch={ps.certificate.branch} "
          f"strong_homotopic_like={ps.certificate.strong_homotopic_like} "
          f"paths={len(ps.paths)} delta_p={report.delta_p:.2f} "
          f"time={elapsed:.2f}s out={out / 'transfer.svg'}")
    return 0


def _feature_errors(points, feature, y_d):
    y = feature_eval(points, feature)
    diff = y - y_d
    if feature.kind == "point_angle":
        ang = abs(float(diff[2]))
        ang = min(ang, 2.0 * np.pi - ang)
        return float(np.linalg.norm(diff[:2])), float(np.degrees(ang))
    return float(np.linalg.norm(diff)), None


def _min_alpha_deg(rows, feature):
    if feature is None or feature.kind != "point_angle" or not rows:
        return None
    vals = [row["y2"] for row in rows if "y2" in row]
    return float(np.degrees(min(vals))) if vals else None


def cmd_track(args) -> int:
    sc = load_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    if sc.feature is None or sc.y_d is None:
        raise ScenarioError(f"scenario {sc.name!r} has no feature/y_d to track")
    plant = sc.make_plant()
    s0 = plant.observe()
    controller = args.controller or "pathset"
    _LOG.info("tracking %s with the %s controller, seed %d", sc.name, controller, seed)
    out = _out_dir(args, sc.name)

    branch = None
    certificate = None
    ps = None
    if controller == "pure":
        report = run_pure_control(plant, sc.feature, sc.y_d, sc.control)
    else:
        sd, pivot = _resolve_targets(sc, s0, seed)
        ps, transfer_report = generate_path_set(
            s0, sd, pivot, sc.env, sc.planner, sc.transfer, seed)
        branch = ps.certificate.branch
        certificate = {
            "branch": ps.certificate.branch,
            "strong_homotopic_like": ps.certificate.strong_homotopic_like,
            "resolution": ps.certificate.resolution,
        }
        tracker = Tracker(plant, ps, sc.env, sc.control, seed, sc.feature, sc.y_d)
        report = tracker.run()

    telemetry_path = out / f"telemetry_{controller}.csv"
    write_telemetry(report.telemetry, telemetry_path)
    if ps is not None:
        render_run(sc.env, ps, report.telemetry, out / "run.svg")

    pos_err, ang_err = _feature_errors(plant.observe(), sc.feature, sc.y_d)
    doc = {
        "scenario": sc.name,
        "seed": seed,
        "controller": controller,
        "success": report.success,
        "reason": report.reason,
        "steps": report.steps,
        "branch": branch,
        "certificate": certificate,
        "telemetry": str(telemetry_path),
        "final_target_error": report.final_error,
        "final_feature_error": pos_err,
        "final_angle_error_deg": ang_err,
        "min_body_distance": report.min_body_distance,
        "min_alpha_deg": _min_alpha_deg(report.telemetry, sc.feature),
        "risky_intervals": report.relaxed_intervals,
        "violation_intervals": report.extras.get("violation_intervals", []),
        "relaxed_c1_intervals": report.extras.get("relaxed_c1_intervals", []),
        "modes": report.modes,
        "wall_time": report.wall_time,
    }
    with open(out / f"report_{controller}.json", "w") as fh:
        json.dump(_json_ready(doc), fh, indent=2)
        fh.write("\n")
    print(f"scenario={sc.name} controller={controller} success={report.success} "
          f"steps={report.steps} final_error={report.final_error:.2f} "
          f"feature_error={pos_err:.2f} time={report.wall_time:.2f}s out={out}")
    return 0 if report.success else 2


def _expand_patterns(patterns) -> list[str]:
    canned = set(available_scenarios())
    out = []
    for pattern in patterns:
        hits = sorted(glob.glob(pattern))
        if hits:
            out.extend(hits)
        elif pattern in canned:
            out.append(pattern)
        elif FsPath(pattern).exists():
            out.append(pattern)
    return out


def _bench_one(src, seed: int) -> dict:
    sc = load_scenario(src).with_seed(seed)
    row = {"scenario": sc.name, "seed": seed, "kind": "", "success": False,
           "final_error": float("nan"), "min_body_distance": float("inf"),
           "wall_time": 0.0, "reason": ""}
    t0 = time.perf_counter()
    try:
        if sc.body is not None and sc.feature is not None and sc.y_d is not None:
            row["kind"] = "track"
            plant = sc.make_plant()
            sd, pivot = _resolve_targets(sc, plant.observe(), seed)
            ps, _ = generate_path_set(plant.observe(), sd, pivot, sc.env,
                                      sc.planner, sc.transfer, seed)
            report = Tracker(plant, ps, sc.env, sc.control, seed,
                             sc.feature, sc.y_d).run()
            row.update(success=report.success, final_error=report.final_error,
                       min_body_distance=report.min_body_distance,
                       reason=report.reason)
        else:
            row["kind"] = "transfer"
            s0 = sc.start_points()
            sd, pivot = _resolve_targets(sc, s0, seed)
            ps, _ = generate_path_set(s0, sd, pivot, sc.env,
                                      sc.planner, sc.transfer, seed)
            ok = bool(ps.certificate.strong_homotopic_like)
            ends = np.array([p.end for p in ps.paths])
            row.update(success=ok,
                       final_error=float(np.max(np.linalg.norm(ends - sd, axis=1))),
                       reason=f"branch={ps.certificate.branch}")
    except PathsetError as exc:
        row["reason"] = f"{type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - t0
    return row


def cmd_bench(args) -> int:
    sources = _expand_patterns(args.scenarios)
    if not sources:
        print("bench: no scenarios match the given patterns", file=sys.stderr)
        return 3
    rows = [_bench_one(src, seed)
            for src in sources for seed in range(args.seeds)]
    header = f"{'scenario':<28}{'seed':>5}{'kind':>10}{'ok':>4}" \
             f"{'final_err':>11}{'min_d':>9}{'time':>8}"
    print(header)
    print("-" * len(header))
    for r in rows:
        min_d = r["min_body_distance"]
        min_d_s = f"{min_d:.1f}" if np.isfinite(min_d) else "-"
        print(f"{r['scenario']:<28}{r['seed']:>5}{r['kind']:>10}"
              f"{('y' if r['success'] else 'n'):>4}{r['final_error']:>11.2f}"
              f"{min_d_s:>9}{r['wall_time']:>8.2f}")
    by_scenario = {}
    for r in rows:
        by_scenario.setdefault(r["scenario"], []).append(r)
    print("-" * len(header))
    for name in sorted(by_scenario):
        group = by_scenario[name]
        ok = sum(1 for g in group if g["success"])
        errs = [g["final_error"] for g in group if np.isfinite(g["final_error"])]
        mean_err = float(np.mean(errs)) if errs else float("nan")
        print(f"{name:<28}{ok}/{len(group)} ok  mean_final_err={mean_err:.2f}")
    if args.out:
        out = FsPath(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_telemetry(rows, out / "bench.csv")
    return 0 if rows else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathset",
        description="Plan, transfer, and track feedback-point path sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_scenario=True):
        if needs_scenario:
            p.add_argument("--scenario", required=True,
                           help="scenario file or canned name")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--out", default=None, help="output directory")

    p_plan = sub.add_parser("plan", help="plan the pivot path")
    common(p_plan)
    p_plan.add_argument("--cost", choices=["length", "composite"], default=None)
    p_plan.set_defaults(func=cmd_plan)

    p_transfer = sub.add_parser("transfer", help="generate the full path set")
    common(p_transfer)
    p_transfer.set_defaults(func=cmd_transfer)

    p_track = sub.add_parser("track", help="run the closed-loop controller")
    common(p_track)
    p_track.add_argument("--controller", choices=["pathset", "pure"],
                         default="pathset")
    p_track.set_defaults(func=cmd_track)

    p_bench = sub.add_parser("bench", help="run scenario batches")
    p_bench.add_argument("scenarios", nargs="+",
                         help="scenario files, globs, or canned names")
    p_bench.add_argument("--seeds", type=int, default=3)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code in (0, None):
            return 0
        return 3
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PathsetError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
