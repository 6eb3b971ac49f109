"""Batch evaluation of prediction files against a dataset manifest.

For each method and frame: triangulate the head from the stereo face
observations, turn the predicted angles into a camera-frame direction,
intersect with the work surface, build the ground-truth direction from the
same head point and the target center, and record both error measures.
Frames that cannot be evaluated (missing prediction, missing face,
triangulation failure) are counted and reported as skipped, never silently
dropped. Rays that miss the surface count as frames with infinite
distance.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .calibration import CAMERA_LEFT, CAMERA_RIGHT, StereoRig
from .errors import (
    DegenerateDataError,
    EmptySelectionError,
    FormatError,
)
from .formats import (
    DatasetManifest,
    provenance,
    read_faces,
    read_grid_config,
    read_plane_corners,
    read_plane_pose,
    read_predictions,
    read_stereo,
)
from .grid import GridConfig, target_center
from .metrics import (
    DEFAULT_THRESHOLDS_CM,
    EvalRecord,
    error_cdf,
    evaluate_frame,
    summarize,
    yaw_pitch_histogram,
)
from .pipeline import (
    correct_gaze_to_camera_frame,
    gaze_point_on_surface,
    ground_truth_direction,
)
from .plane import PlanePose, estimate_plane_pose
from .triangulation import head_point

logger = logging.getLogger(__name__)


@dataclass
class MethodReport:
    method: str
    records: list[EvalRecord]
    skipped: list[tuple[str, str]]  # (frame_id, reason)
    pred_directions: list
    gt_directions: list


@dataclass
class ReportBundle:
    """Everything cmd_evaluate writes: summary rows, curves, histograms."""

    summary_rows: list[dict]
    cdf_rows: list[tuple]
    hist_rows: list[tuple]
    thresholds_cm: tuple[float, ...]
    provenance: dict
    methods: dict[str, MethodReport] = field(default_factory=dict)


def load_rig(manifest: DatasetManifest) -> StereoRig:
    return read_stereo(manifest.stereo)


def load_plane(manifest: DatasetManifest, rig: StereoRig, grid: GridConfig,
               plane_override=None) -> PlanePose:
    """Plane pose from the manifest's pose file, an override, or the corners."""
    if plane_override is not None:
        return read_plane_pose(plane_override)
    if manifest.plane_pose is not None:
        return read_plane_pose(manifest.plane_pose)
    corners = read_plane_corners(manifest.plane_corners)
    return estimate_plane_pose(corners, grid, rig.left)


def _evaluate_one(frame, faces_by_key, preds_by_frame, rig, plane, grid, source, method):
    fid = frame.frame_id
    pred = preds_by_frame.get(fid)
    if pred is None:
        return None, (fid, "missing_prediction"), None, None
    left = faces_by_key.get((fid, CAMERA_LEFT))
    right = faces_by_key.get((fid, CAMERA_RIGHT))
    if left is None or right is None:
        return None, (fid, "missing_face_observation"), None, None
    try:
        head = head_point(left, right, rig, source)
        direction = correct_gaze_to_camera_frame(pred, head)
        estimate = gaze_point_on_surface(head, direction, plane)
        target = target_center(grid, frame.target_id)
        gt_dir = ground_truth_direction(head, plane, target)
    except DegenerateDataError as exc:
        return None, (fid, type(exc).__name__), None, None
    record = evaluate_frame(
        direction, gt_dir, estimate, target,
        frame_id=fid, method_id=method, tags=frame.tags, target_id=frame.target_id,
    )
    return record, None, direction, gt_dir


def evaluate_method(
    manifest: DatasetManifest,
    method: str,
    rig: StereoRig,
    plane: PlanePose,
    grid: GridConfig,
    threads: int = 1,
) -> MethodReport:
    ref = manifest.predictions[method]
    preds = read_predictions(ref.path)
    known = {f.frame_id for f in manifest.frames}
    for p in preds:
        if p.frame_id not in known:
            raise FormatError(
                f"prediction frame {p.frame_id!r} not in manifest", file=str(ref.path)
            )
        if p.method_id != method:
            raise FormatError(
                f"prediction row for method {p.method_id!r} in file of {method!r}",
                file=str(ref.path),
            )
    preds_by_frame = {p.frame_id: p for p in preds}
    faces_by_key = {}
    for f in read_faces(manifest.faces):
        key = (f.frame_id, f.camera_id)
        if key in faces_by_key:
            raise FormatError(
                f"multiple face observations for frame {f.frame_id!r} camera {f.camera_id!r}; "
                "expected exactly one face per frame per camera",
                file=str(manifest.faces),
            )
        faces_by_key[key] = f

    work = lambda frame: _evaluate_one(
        frame, faces_by_key, preds_by_frame, rig, plane, grid, ref.head_source, method
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, manifest.frames))
    else:
        results = [work(frame) for frame in manifest.frames]

    records, skipped, pred_dirs, gt_dirs = [], [], [], []
    for record, skip, pred_dir, gt in results:
        if record is not None:
            records.append(record)
            pred_dirs.append(pred_dir)
            gt_dirs.append(gt)
        else:
            skipped.append(skip)
    if skipped:
        logger.warning("method %s: skipped %d of %d frames", method, len(skipped), len(manifest.frames))
    return MethodReport(method, records, skipped, pred_dirs, gt_dirs)


def evaluate_manifest(
    manifest: DatasetManifest,
    *,
    methods=None,
    tag_filters=None,
    thresholds_cm=DEFAULT_THRESHOLDS_CM,
    plane_override=None,
    threads: int = 1,
) -> ReportBundle:
    """Run the full evaluation and assemble the report bundle.

    ``tag_filters`` defaults to the overall split plus one per distinct tag
    in the manifest. Output ordering is deterministic: methods and tags
    sorted, thresholds ascending.
    """
    grid = read_grid_config(manifest.grid_config)
    rig = load_rig(manifest)
    plane = load_plane(manifest, rig, grid, plane_override)

    selected = sorted(manifest.predictions) if methods is None else list(methods)
    for m in selected:
        if m not in manifest.predictions:
            raise FormatError(f"method {m!r} not in manifest predictions")
    if tag_filters is None:
        tags = sorted({t for f in manifest.frames for t in f.tags})
        tag_filters = [None] + tags
    thresholds_cm = tuple(sorted(float(t) for t in thresholds_cm))

    reports = {
        m: evaluate_method(manifest, m, rig, plane, grid, threads=threads) for m in selected
    }

    frame_tags = {f.frame_id: f.tags for f in manifest.frames}
    summary_rows = []
    cdf_rows = []
    hist_rows = []
    for m in selected:
        rep = reports[m]
        for tag in tag_filters:
            try:
                s = summarize(rep.records, tag, thresholds_cm)
            except EmptySelectionError:
                continue
            if tag is None:
                n_skipped = len(rep.skipped)
            else:
                n_skipped = sum(1 for fid, _ in rep.skipped if tag in frame_tags.get(fid, ()))
            summary_rows.append(
                {
                    "method": m,
                    "tag_filter": tag or "",
                    "n_frames": s.n_frames,
                    "n_skipped": n_skipped,
                    "n_failures": s.n_failures,
                    "mean_angular_deg": s.mean_angular_deg,
                    "median_distance_cm": s.median_distance_cm,
                    "precision_at": s.precision_at,
                }
            )
            for kind in ("angular", "distance"):
                for threshold, fraction in error_cdf(rep.records, kind, tag):
                    cdf_rows.append((m, tag or "", kind, threshold, fraction))
        if rep.records:
            hist_rows.extend(_hist_rows(m, yaw_pitch_histogram(rep.pred_directions)))
            hist_rows.extend(
                _hist_rows(f"{m}:ground_truth", yaw_pitch_histogram(rep.gt_directions))
            )

    prov = provenance(
        inputs={p.name: p for p in [manifest.root / "manifest.json", *manifest.referenced_files()] if p.is_file()},
        config={
            "methods": selected,
            "tag_filters": [t or "" for t in tag_filters],
            "thresholds_cm": list(thresholds_cm),
        },
    )
    return ReportBundle(
        summary_rows=summary_rows,
        cdf_rows=cdf_rows,
        hist_rows=hist_rows,
        thresholds_cm=thresholds_cm,
        provenance=prov,
        methods=reports,
    )


def _hist_rows(label: str, hist):
    rows = []
    ny, np_ = hist.counts.shape
    for a in range(ny):
        for b in range(np_):
            c = int(hist.counts[a, b])
            if c == 0:
                continue
            rows.append(
                (
                    label,
                    float(hist.yaw_edges[a]), float(hist.yaw_edges[a + 1]),
                    float(hist.pitch_edges[b]), float(hist.pitch_edges[b + 1]),
                    c,
                )
            )
    return rows
