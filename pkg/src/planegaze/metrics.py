"""Evaluation metrics: angular error, surface distance, precision, CDFs.

Frames whose gaze ray never reaches the surface carry an infinite surface
distance. Infinities stay in every denominator and never count as covered,
so a failure can only lower the reported precision. Medians use the
mid-average convention for even counts; an infinity at the midpoint makes
the median infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySelectionError
from .geometry import angular_error_deg, as_vec3, directions_to_yaw_pitch
from .pipeline import STATUS_OK, SurfaceGazeEstimate

DEFAULT_THRESHOLDS_CM = (10.0, 20.0, 50.0)

DEFAULT_YAW_EDGES_DEG = np.arange(-90.0, 90.0 + 2.0, 2.0)
DEFAULT_PITCH_EDGES_DEG = np.arange(-120.0, 30.0 + 2.0, 2.0)


@dataclass(frozen=True)
class EvalRecord:
    """Per-frame, per-method errors."""

    frame_id: str
    method_id: str
    angular_error_deg: float
    surface_distance_m: float
    tags: frozenset[str] = field(default_factory=frozenset)
    target_id: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.angular_error_deg <= 180.0):
            raise ValueError(f"angular error {self.angular_error_deg} outside [0, 180]")
        if not (self.surface_distance_m >= 0.0 or math.isinf(self.surface_distance_m)):
            raise ValueError(f"surface distance {self.surface_distance_m} invalid")
        object.__setattr__(self, "tags", frozenset(self.tags))


@dataclass(frozen=True)
class MetricsSummary:
    mean_angular_deg: float
    median_distance_cm: float
    precision_at: dict[float, float]
    n_frames: int
    n_failures: int


@dataclass(frozen=True)
class Histogram2D:
    yaw_edges: np.ndarray
    pitch_edges: np.ndarray
    counts: np.ndarray


def evaluate_frame(
    pred_direction,
    gt_direction,
    estimate: SurfaceGazeEstimate,
    target,
    *,
    frame_id: str,
    method_id: str,
    tags=(),
    target_id: int | None = None,
) -> EvalRecord:
    """Errors for one frame: angle between directions, distance on the surface.

    The surface distance is infinite whenever the intersection status is
    not ok; the angular error is always finite.
    """
    angle = angular_error_deg(pred_direction, gt_direction)
    if estimate.status == STATUS_OK:
        p = as_vec3(estimate.point)
        t = as_vec3(target)
        distance = float(np.linalg.norm(p[:2] - t[:2]))
    else:
        distance = math.inf
    return EvalRecord(frame_id, method_id, angle, distance, frozenset(tags), target_id)


def _select(records, tag_filter: str | None):
    if tag_filter is None:
        out = list(records)
    else:
        out = [r for r in records if tag_filter in r.tags]
    if not out:
        raise EmptySelectionError(
            "no records" if tag_filter is None else f"no records with tag {tag_filter!r}"
        )
    return sorted(out, key=lambda r: (r.frame_id, r.method_id))


def summarize(records, tag_filter: str | None = None, thresholds_cm=DEFAULT_THRESHOLDS_CM) -> MetricsSummary:
    """Aggregate records into the headline numbers.

    Mean over angular errors; median over distances with infinities
    participating as larger than any finite value; Precision@X = share of
    frames with distance <= X cm (boundary inclusive).
    """
    sel = _select(records, tag_filter)
    angles = np.array([r.angular_error_deg for r in sel])
    dist_cm = np.array([r.surface_distance_m * 100.0 for r in sel])
    n = len(sel)
    precision = {
        float(x): float(100.0 * np.count_nonzero(dist_cm <= x) / n)
        for x in sorted(set(float(t) for t in thresholds_cm))
    }
    return MetricsSummary(
        mean_angular_deg=float(np.mean(angles)),
        median_distance_cm=float(np.median(dist_cm)),
        precision_at=precision,
        n_frames=n,
        n_failures=int(np.count_nonzero(np.isinf(dist_cm))),
    )


def error_cdf(records, which: str, tag_filter: str | None = None) -> list[tuple[float, float]]:
    """Empirical CDF points (threshold, fraction), sorted and monotone.

    ``which`` is "angular" (degrees) or "distance" (centimeters). Infinite
    distances count in the denominator but never appear as thresholds, so
    the curve plateaus below 1 when failures exist.
    """
    sel = _select(records, tag_filter)
    if which == "angular":
        values = np.array([r.angular_error_deg for r in sel])
    elif which == "distance":
        values = np.array([r.surface_distance_m * 100.0 for r in sel])
    else:
        raise ValueError(f"which must be 'angular' or 'distance', got {which!r}")
    n = len(values)
    finite = np.sort(values[np.isfinite(values)])
    if finite.size == 0:
        return []
    uniq, counts = np.unique(finite, return_counts=True)
    cum = np.cumsum(counts)
    return [(float(v), float(c) / n) for v, c in zip(uniq, cum)]


def cdf_fraction_at(cdf: list[tuple[float, float]], threshold: float) -> float:
    """Value of a step CDF at ``threshold`` (0 before the first point)."""
    frac = 0.0
    for v, f in cdf:
        if v <= threshold:
            frac = f
        else:
            break
    return frac


def continued_yaw_pitch_deg(directions) -> np.ndarray:
    """Yaw/pitch in degrees with pitch continued below -90 for steep downward gaze.

    A direction pointing down and past the vertical would canonically flip
    its yaw by 180 degrees; instead the yaw is kept in (-90, 90] and the
    pitch runs on past -90, which keeps tabletop distributions in one
    connected blob.
    """
    d = as_vec3(directions)
    yp = np.degrees(directions_to_yaw_pitch(d))
    yaw, pitch = yp[..., 0].copy(), yp[..., 1].copy()
    flip = (np.abs(yaw) > 90.0) & (pitch < 0.0)
    yaw = np.where(flip, yaw - np.sign(yaw) * 180.0, yaw)
    pitch = np.where(flip, -180.0 - pitch, pitch)
    return np.stack([yaw, pitch], axis=-1)


def yaw_pitch_histogram(
    directions,
    yaw_edges_deg=DEFAULT_YAW_EDGES_DEG,
    pitch_edges_deg=DEFAULT_PITCH_EDGES_DEG,
) -> Histogram2D:
    """2D histogram of gaze directions over yaw/pitch bins in degrees.

    Every input lands in a bin: angles outside the edge range are clipped
    into the boundary bins, so the counts always total the input size.
    """
    d = np.atleast_2d(as_vec3(directions))
    if d.shape[0] == 0:
        raise EmptySelectionError("no directions to histogram")
    yp = continued_yaw_pitch_deg(d)
    yaw_edges = np.asarray(yaw_edges_deg, dtype=float)
    pitch_edges = np.asarray(pitch_edges_deg, dtype=float)
    yaw = np.clip(yp[:, 0], yaw_edges[0], yaw_edges[-1])
    pitch = np.clip(yp[:, 1], pitch_edges[0], pitch_edges[-1])
    counts, _, _ = np.histogram2d(yaw, pitch, bins=(yaw_edges, pitch_edges))
    return Histogram2D(yaw_edges, pitch_edges, counts.astype(int))
