"""Command-line surface: link simulation, coverage, calibration, channel
comparison, scene validation and the HTTP service.

Exit codes: 0 ok, 2 bad flags, 3 scene/input errors, 4 no coverage,
5 infeasible calibration setup.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .antenna import AntennaError, parse_antenna_spec
from .calibrate import (CalibrationError, CalibrationProblem, ParameterSpec, SaSchedule,
                        load_measurements_csv, render_report, report, simulated_annealing,
                        split_points)
from .channel import SimilarityGates, path_loss, rms_delay_spread, similarity_index
from .coverage import GridSpec, coverage
from .materials import MaterialError, default_library, load_material_library
from .profiles import ProfileError, resolve
from .rt.engine import simulate_link
from .rt.path import TerminalSpec, load_mpcs, realization_to_dict, write_mpcs
from .scene import SceneError, load_scene

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENE = 3
EXIT_NO_COVERAGE = 4
EXIT_INFEASIBLE = 5

DATA_DIR_ENV = "MART_DATA_DIR"


def _parse_vec(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z - got {text!r}")
    return np.array([float(p) for p in parts])


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(",")
    if len(parts) not in (5, 6):
        raise argparse.ArgumentTypeError(
            f"expected xmin,ymin,xmax,ymax,step[,height] - got {text!r}")
    vals = [float(p) for p in parts]
    height = vals[5] if len(vals) == 6 else 1.5
    try:
        return GridSpec(x_min=vals[0], y_min=vals[1], x_max=vals[2], y_max=vals[3],
                        step=vals[4], height=height)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _parse_param(text: str) -> ParameterSpec:
    # material.field:lo..hi
    try:
        target, bounds = text.split(":")
        material, fieldname = target.rsplit(".", 1)
        lo, hi = bounds.split("..")
        return ParameterSpec(material=material, field=fieldname,
                             lo=float(lo), hi=float(hi))
    except CalibrationError:
        raise
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected material.field:lo..hi - got {text!r}") from e


def _library(args):
    if getattr(args, "materials", None):
        return load_material_library(args.materials)
    env_dir = os.environ.get(DATA_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / "materials.json"
        if candidate.exists():
            return load_material_library(candidate)
    return default_library()


def _load_scene(args):
    return load_scene(args.scene, _library(args))


def _profile(args):
    overrides = {}
    if getattr(args, "profile_file", None):
        overrides = json.loads(Path(args.profile_file).read_text())
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return resolve(args.profile, overrides)


def cmd_simulate(args) -> int:
    scene = _load_scene(args)
    cfg = _profile(args)
    tx = TerminalSpec(args.tx, parse_antenna_spec(args.tx_antenna))
    rx = TerminalSpec(args.rx, parse_antenna_spec(args.rx_antenna))
    r = simulate_link(scene, tx, rx, args.freq, cfg, time=args.time)
    pl = path_loss(r)
    if args.out:
        write_mpcs(r, args.out)
    else:
        print(json.dumps(realization_to_dict(r), indent=1))
    if pl is None:
        print("no coverage: 0 paths", file=sys.stderr)
        return EXIT_NO_COVERAGE
    ds_ns = rms_delay_spread(r) * 1e9
    print(f"n_paths={r.n_paths} pl_db={pl:.2f} ds_ns={ds_ns:.3f} "
          f"compute_ms={r.compute_seconds * 1e3:.1f}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    scene = _load_scene(args)
    cfg = _profile(args)
    tx = TerminalSpec(args.tx, parse_antenna_spec(args.tx_antenna))
    grid = coverage(scene, tx, args.grid, args.freq, cfg,
                    tx_power_dbm=args.tx_power_dbm, time=args.time,
                    threads=args.threads)
    out_csv = grid.to_csv()
    if args.out:
        Path(args.out).write_text(out_csv)
    else:
        sys.stdout.write(out_csv)
    if args.json_out:
        Path(args.json_out).write_text(grid.to_json())
    print(f"covered cells: {100.0 * grid.covered_fraction():.1f}%", file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    scene = _load_scene(args)
    points = load_measurements_csv(args.measurements)
    if args.validation_count >= len(points):
        raise CalibrationError(
            f"validation-count {args.validation_count} >= {len(points)} points")
    train, validation = split_points(points, args.validation_count, args.seed or 0)
    schedule = SaSchedule(seed=args.seed or 0)
    if args.schedule_file:
        doc = json.loads(Path(args.schedule_file).read_text())
        schedule = SaSchedule(**{**doc, "seed": args.seed or doc.get("seed", 0)})
    problem = CalibrationProblem(
        scene=scene, tx=TerminalSpec(args.tx, parse_antenna_spec(args.tx_antenna)),
        params=args.param, train_points=train, validation_points=validation,
        profile=resolve(args.profile))
    result = simulated_annealing(problem, schedule)
    doc = report(result)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=1))
    print(render_report(result))
    return EXIT_OK


def cmd_compare(args) -> int:
    a = load_mpcs(args.a)
    b = load_mpcs(args.b)
    gates = SimilarityGates(delay_gate=args.delay_gate * 1e-9, angle_gate=args.angle_gate)
    si = similarity_index(a, b, gates)
    print(f"SI = {si:.1f}%")
    return EXIT_OK


def cmd_validate_scene(args) -> int:
    scene = _load_scene(args)
    from .scene import extract_diffraction_edges
    edges = extract_diffraction_edges(scene)
    b = scene.bounds
    print(f"triangles: {scene.n_static_triangles}")
    print(f"dynamic objects: {len(scene.dynamic_objects)}")
    print(f"dropped degenerate triangles: {scene.dropped_degenerate}")
    print(f"diffraction edges: {len(edges)}")
    print(f"bounds: [{b.lo[0]:.3f}, {b.lo[1]:.3f}, {b.lo[2]:.3f}] .. "
          f"[{b.hi[0]:.3f}, {b.hi[1]:.3f}, {b.hi[2]:.3f}]")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.data_dir, max_concurrent_jobs=args.max_jobs)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raytwin",
        description="deterministic ray-tracing radio channel simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, antennas=True):
        p.add_argument("--scene", required=True, help="scene JSON file")
        p.add_argument("--materials", help="material library JSON (default: "
                       f"${DATA_DIR_ENV}/materials.json or built-in)")
        p.add_argument("--freq", type=float, required=True, help="carrier frequency, Hz")
        p.add_argument("--profile", default="online", help="offline | online | custom")
        p.add_argument("--profile-file", help="JSON file of engine config overrides")
        p.add_argument("--time", type=float, default=0.0, help="scene time, seconds")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        if antennas:
            p.add_argument("--tx-antenna", default="isotropic")
            p.add_argument("--rx-antenna", default="isotropic")

    p = sub.add_parser("simulate", help="single-link MPC simulation")
    common(p)
    p.add_argument("--tx", type=_parse_vec, required=True, help="x,y,z meters")
    p.add_argument("--rx", type=_parse_vec, required=True)
    p.add_argument("--out", help="MPC JSON output path (default: stdout)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("coverage", help="coverage grid over an area")
    common(p)
    p.add_argument("--tx", type=_parse_vec, required=True)
    p.add_argument("--grid", type=_parse_grid, required=True,
                   help="xmin,ymin,xmax,ymax,step[,height]")
    p.add_argument("--tx-power-dbm", type=float, default=0.0)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--json-out", help="also write the JSON grid here")
    p.set_defaults(fn=cmd_coverage, profile="offline")

    p = sub.add_parser("calibrate", help="fit material parameters to measurements")
    common(p)
    p.add_argument("--tx", type=_parse_vec, required=True)
    p.add_argument("--measurements", required=True, help="measurement CSV")
    p.add_argument("--param", type=_parse_param, action="append", required=True,
                   help="material.field:lo..hi (repeatable)")
    p.add_argument("--validation-count", type=int, required=True)
    p.add_argument("--schedule-file", help="JSON file of SA schedule fields")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("compare", help="similarity index between two MPC files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--delay-gate", type=float, default=10.0, help="ns")
    p.add_argument("--angle-gate", type=float, default=10.0, help="degrees")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("validate-scene", help="check a scene file and print stats")
    p.add_argument("--scene", required=True)
    p.add_argument("--materials")
    p.set_defaults(fn=cmd_validate_scene)

    p = sub.add_parser("serve", help="run the HTTP job service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default="./raytwin-data")
    p.add_argument("--max-jobs", type=int, default=2)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SceneError, MaterialError, AntennaError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as e:
        if isinstance(e, (CalibrationError, ProfileError)):
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCENE


if __name__ == "__main__":
    sys.exit(main())
