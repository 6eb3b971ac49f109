"""Command-line surface: calibrate, plane-pose, evaluate, synth, report.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 degenerate data. File schemas are documented in FORMATS.md.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .calibration import CAMERA_LEFT, CAMERA_RIGHT, calibrate_camera, calibrate_stereo
from .errors import (
    DegenerateDataError,
    FormatError,
    NumericalError,
    PlanegazeError,
)
from .formats import (
    provenance,
    read_corners,
    read_grid_config,
    read_intrinsics,
    read_manifest,
    read_plane_corners,
    read_summary_csv,
    sha256_file,
    write_cdf_csv,
    write_dataset,
    write_hist_csv,
    write_intrinsics,
    write_plane_pose,
    write_json,
    write_stereo,
    write_summary_csv,
)
from .grid import GridConfig
from .metrics import DEFAULT_THRESHOLDS_CM
from .plane import estimate_plane_pose
from .synthetic import MethodSpec, NoiseSpec, SceneSpec, default_scene, generate_scene, perturb

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_DEGENERATE = 3


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors (default would be 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _nonnegative_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
    if not math.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"{name} must be >= 0, got {text}")
    return value


def _image_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"image size must look like 1280x720, got {text!r}")


def _add_globals(parser) -> None:
    # accepted before or after the subcommand; SUPPRESS keeps the subparser
    # from clobbering a value given at the top level
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for anything stochastic (default 0)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads for per-frame work (default 1)")
    parser.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="JSON config with defaults (thresholds_cm)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="planegaze", description=__doc__)
    parser.add_argument("--version", action="version", version=f"planegaze {__version__}")
    _add_globals(parser)
    parser.set_defaults(seed=0, threads=1, config=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        _add_globals(p)
        return p

    p = add_parser("calibrate", help="intrinsics + stereo pose from corner files")
    p.add_argument("--corners", type=Path, action="append", required=True,
                   help="corner CSV (repeatable); may mix cameras")
    p.add_argument("--grid", type=Path, required=True, help="grid config JSON")
    p.add_argument("--image-size", type=_image_size, required=True, help="sensor size, e.g. 1280x720")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--release-skew", action="store_true", help="also estimate the skew term")
    p.set_defaults(func=cmd_calibrate)

    p = add_parser("plane-pose", help="work-surface pose from display grid corners")
    p.add_argument("--corners", type=Path, required=True, help="plane corner CSV")
    p.add_argument("--grid", type=Path, required=True)
    p.add_argument("--intrinsics", type=Path, required=True, help="left-camera intrinsics JSON")
    p.add_argument("--out", type=Path, required=True, help="output plane-pose JSON path")
    p.set_defaults(func=cmd_plane_pose)

    p = add_parser("evaluate", help="score prediction files against a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--methods", type=str, default=None, help="comma-separated method subset")
    p.add_argument("--tags", type=str, default=None, help="comma-separated tag filters (default: all)")
    p.add_argument("--thresholds", type=str, default=None, help="comma-separated precision thresholds in cm")
    p.add_argument("--plane", type=Path, default=None, help="plane-pose JSON override")
    p.add_argument("--out", type=Path, required=True, help="report output directory")
    p.set_defaults(func=cmd_evaluate)

    p = add_parser("synth", help="generate a synthetic dataset with known ground truth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--frames", type=int, default=200)
    p.add_argument("--calib-views", type=int, default=15)
    p.add_argument("--scene", type=Path, default=None, help="scene config JSON (overrides flags)")
    p.add_argument("--corner-noise", type=lambda s: _nonnegative_float(s, "corner-noise"),
                   default=0.0, help="corner pixel noise sigma")
    p.add_argument("--face-noise", type=lambda s: _nonnegative_float(s, "face-noise"),
                   default=0.0, help="face point pixel noise sigma")
    p.add_argument("--gaze-noise", type=lambda s: _nonnegative_float(s, "gaze-noise"),
                   default=0.0, help="gaze angular noise sigma, degrees")
    p.add_argument("--gaze-bias", type=float, nargs=2, default=(0.0, 0.0),
                   metavar=("YAW_DEG", "PITCH_DEG"), help="fixed yaw/pitch bias, degrees")
    p.set_defaults(func=cmd_synth)

    p = add_parser("report", help="print a report bundle as a fixed-width table")
    p.add_argument("--report", type=Path, required=True, help="report directory or summary CSV")
    p.add_argument("--method", type=str, default=None, help="only this method")
    p.add_argument("--tag", type=str, default=None, help="only this tag filter")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, PlanegazeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# --- commands ---------------------------------------------------------------


def cmd_calibrate(args) -> int:
    observations = []
    for path in args.corners:
        observations.extend(read_corners(path))
    grid = read_grid_config(args.grid)
    inputs = {p.name: p for p in [*args.corners, args.grid]}

    by_camera = {CAMERA_LEFT: [], CAMERA_RIGHT: []}
    for ob in observations:
        by_camera[ob.camera_id].append(ob)

    results = {}
    for camera in (CAMERA_LEFT, CAMERA_RIGHT):
        obs = by_camera[camera]
        if not obs:
            continue
        result = calibrate_camera(obs, grid, args.image_size, fix_skew=not args.release_skew)
        results[camera] = result
        print(f"{camera}: rms {result.rms_reprojection:.6g} px over {len(result.per_view_poses)} views")
        for vid in sorted(result.per_view_rms):
            print(f"  view {vid}: rms {result.per_view_rms[vid]:.6g} px")
        write_intrinsics(
            args.out / f"intrinsics_{camera}.json",
            result.intrinsics,
            camera=camera,
            rms_px=result.rms_reprojection,
            per_view_rms=result.per_view_rms,
            prov=provenance(inputs=inputs, config={"origin": "estimated"}),
        )

    if len(results) == 2:
        rig = calibrate_stereo(results[CAMERA_LEFT], results[CAMERA_RIGHT], observations, grid)
        write_stereo(args.out / "stereo.json", rig,
                     prov=provenance(inputs=inputs, config={"origin": "estimated"}))
        print(f"stereo: baseline {rig.baseline:.6g} m")
    elif not results:
        raise FormatError("corner files contain no observations")
    return EXIT_OK


def cmd_plane_pose(args) -> int:
    corners = read_plane_corners(args.corners)
    grid = read_grid_config(args.grid)
    K = read_intrinsics(args.intrinsics)
    pose = estimate_plane_pose(corners, grid, K)
    inputs = {p.name: p for p in [args.corners, args.grid, args.intrinsics]}
    write_plane_pose(args.out, pose, prov=provenance(inputs=inputs, config={"origin": "estimated"}))
    print(f"plane pose: rms {pose.rms_reprojection:.6g} px")
    print(f"grid config sha256: {sha256_file(args.grid)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .evaluation import evaluate_manifest

    manifest = read_manifest(args.manifest)
    methods = args.methods.split(",") if args.methods else None
    tag_filters = None
    if args.tags is not None:
        tag_filters = [t if t else None for t in args.tags.split(",")]
    thresholds = _thresholds(args)

    bundle = evaluate_manifest(
        manifest,
        methods=methods,
        tag_filters=tag_filters,
        thresholds_cm=thresholds,
        plane_override=args.plane,
        threads=max(1, args.threads),
    )
    out = Path(args.out)
    input_hashes = bundle.provenance.get("inputs", {})
    prov_meta = {
        "manifest": str(args.manifest),
        "manifest_sha256": sha256_file(args.manifest),
        "inputs_sha256": ";".join(f"{k}={v}" for k, v in sorted(input_hashes.items())),
    }
    write_summary_csv(out / "summary.csv", bundle.summary_rows, bundle.thresholds_cm, prov_meta)
    write_cdf_csv(out / "cdf.csv", bundle.cdf_rows, prov_meta)
    write_hist_csv(out / "histogram.csv", bundle.hist_rows, prov_meta)
    write_json(
        out / "report.json",
        {
            "schema": "planegaze-report-v1",
            "thresholds_cm": list(bundle.thresholds_cm),
            "rows": [
                {**row, "precision_at": {str(k): v for k, v in row["precision_at"].items()}}
                for row in bundle.summary_rows
            ],
            "skipped": {
                m: sorted(rep.skipped) for m, rep in bundle.methods.items() if rep.skipped
            },
            "provenance": bundle.provenance,
        },
    )
    print(f"evaluated {len(bundle.methods)} methods, wrote {len(bundle.summary_rows)} summary rows to {out}")
    return EXIT_OK


def _thresholds(args):
    thresholds = list(DEFAULT_THRESHOLDS_CM)
    if args.config is not None:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad config file: {exc}", file=str(args.config)) from None
        extra = cfg.get("thresholds_cm")
        if extra is not None:
            thresholds = [float(t) for t in extra]
    if getattr(args, "thresholds", None):
        try:
            thresholds = [float(t) for t in args.thresholds.split(",")]
        except ValueError:
            raise FormatError(f"bad --thresholds value {args.thresholds!r}") from None
    return thresholds


def _scene_from_config(path: Path, args) -> SceneSpec:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad scene config: {exc}", file=str(path)) from None
    if cfg.get("schema") != "planegaze-scene-v1":
        raise FormatError("scene config must declare schema planegaze-scene-v1", file=str(path))
    base = default_scene(
        frames=int(cfg.get("frames", args.frames)),
        seed=int(cfg.get("seed", args.seed)),
        calib_views=int(cfg.get("calib_views", args.calib_views)),
    )
    kwargs = {}
    if "grid" in cfg:
        g = cfg["grid"]
        kwargs["grid"] = GridConfig(
            square_size=float(g["square_size_m"]),
            rows=int(g["rows"]),
            cols=int(g["cols"]),
            target_map={int(k): tuple(v) for k, v in g.get("targets", {}).items()},
        )
    if "participants" in cfg:
        kwargs["participants"] = tuple(
            (tuple(map(float, lo)), tuple(map(float, hi))) for lo, hi in cfg["participants"]
        )
    if "methods" in cfg:
        kwargs["methods"] = tuple(
            MethodSpec(m["name"], m.get("convention", "camera_offset"),
                       m.get("head_source", "bbox_center"))
            for m in cfg["methods"]
        )
    if kwargs:
        from dataclasses import replace
        try:
            base = replace(base, **kwargs)
        except ValueError as exc:
            raise FormatError(f"invalid scene config: {exc}", file=str(path)) from None
    return base


def cmd_synth(args) -> int:
    if args.scene is not None:
        spec = _scene_from_config(args.scene, args)
    else:
        spec = default_scene(frames=args.frames, seed=args.seed, calib_views=args.calib_views)
    noise = NoiseSpec(
        corner_px_sigma=args.corner_noise,
        face_px_sigma=args.face_noise,
        gaze_angle_sigma_deg=args.gaze_noise,
        gaze_bias_yaw_deg=args.gaze_bias[0],
        gaze_bias_pitch_deg=args.gaze_bias[1],
    )
    ds = generate_scene(spec, threads=max(1, args.threads))
    ds = perturb(ds, noise, seed=spec.seed)
    manifest = write_dataset(ds, args.out)
    print(f"wrote dataset with {len(ds.truths)} frames to {manifest}")
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.report)
    if path.is_dir():
        path = path / "summary.csv"
    header, rows = read_summary_csv(path)
    if args.method is not None:
        rows = [r for r in rows if r[0] == args.method]
    if args.tag is not None:
        rows = [r for r in rows if r[1] == args.tag]
    if not rows:
        print("no frames matched", file=sys.stderr)
        return EXIT_DEGENERATE

    idx = {name: k for k, name in enumerate(header)}
    p_cols = [h for h in header if h.startswith("p_at_")]
    cols = ["method", "tag_filter", "n_frames", "mean_angular_deg", "median_distance_cm", *p_cols]
    titles = {
        "method": "Method", "tag_filter": "Tag", "n_frames": "Frames",
        "mean_angular_deg": "Mean Angular (deg)", "median_distance_cm": "Median Distance (cm)",
    }
    for h in p_cols:
        titles[h] = "P@" + h[len("p_at_"):].replace("cm", " cm")

    def cell(row, col):
        v = row[idx[col]]
        if col in ("method", "tag_filter", "n_frames"):
            return v if v else ("all" if col == "tag_filter" else v)
        x = float(v)
        if math.isinf(x):
            return ">MAX"
        return f"{x:.2f}"

    table = [[cell(r, c) for c in cols] for r in rows]
    widths = [max(len(titles[c]), *(len(row[k]) for row in table)) for k, c in enumerate(cols)]
    line = "  ".join(titles[c].ljust(widths[k]) for k, c in enumerate(cols))
    print(line)
    print("-" * len(line))
    for row in table:
        print("  ".join(v.ljust(widths[k]) for k, v in enumerate(row)))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
