import math

import numpy as np
import pytest

from planegaze.errors import EmptySelectionError
from planegaze.geometry import yaw_pitch_to_dir
from planegaze.metrics import (
    EvalRecord,
    cdf_fraction_at,
    continued_yaw_pitch_deg,
    error_cdf,
    evaluate_frame,
    summarize,
    yaw_pitch_histogram,
)
from planegaze.pipeline import STATUS_NO_INTERSECTION, STATUS_OK, SurfaceGazeEstimate

INF = math.inf


def record(distance_m, angle=5.0, frame="f0", tags=(), method="m"):
    return EvalRecord(frame, method, angle, distance_m, frozenset(tags))


def records_cm(distances_cm, **kwargs):
    return [
        record(d / 100.0, frame=f"f{k:04d}", **kwargs) if math.isfinite(d) else record(INF, frame=f"f{k:04d}", **kwargs)
        for k, d in enumerate(distances_cm)
    ]


class TestEvaluateFrame:
    def test_perfect_frame(self):
        est = SurfaceGazeEstimate(np.array([0.1, 0.25, 0.0]), 0.5, np.array([0, 0, -1.0]), STATUS_OK)
        rec = evaluate_frame([0, 0, -1.0], [0, 0, -1.0], est, [0.1, 0.25, 0.0], frame_id="f0", method_id="m")
        assert rec.angular_error_deg == 0.0
        assert rec.surface_distance_m == 0.0

    def test_plane_distance(self):
        est = SurfaceGazeEstimate(np.array([0.10, 0.15, 0.0]), 0.5, np.array([0, 0, -1.0]), STATUS_OK)
        rec = evaluate_frame([0, 0, -1.0], [0, 0, -1.0], est, [0.10, 0.25, 0.0], frame_id="f0", method_id="m")
        assert rec.surface_distance_m == pytest.approx(0.10)

    def test_missed_plane_is_infinite_but_angle_finite(self):
        est = SurfaceGazeEstimate(None, None, np.array([1.0, 0, 0]), STATUS_NO_INTERSECTION)
        d = yaw_pitch_to_dir(0.0, math.radians(-10))
        rec = evaluate_frame(d, [0, 0, -1.0], est, [0, 0, 0], frame_id="f0", method_id="m")
        assert math.isinf(rec.surface_distance_m)
        assert rec.angular_error_deg == pytest.approx(10.0, abs=1e-9)


class TestSummarize:
    def test_reference_fixture(self):
        s = summarize(records_cm([5, 15, 25, 60]))
        assert s.median_distance_cm == pytest.approx(20.0)
        assert s.precision_at[10.0] == pytest.approx(25.0)
        assert s.precision_at[20.0] == pytest.approx(50.0)
        assert s.precision_at[50.0] == pytest.approx(75.0)
        assert s.n_frames == 4 and s.n_failures == 0

    def test_failure_participates_in_denominator(self):
        s = summarize(records_cm([5, 15, INF]))
        assert s.median_distance_cm == pytest.approx(15.0)
        assert s.precision_at[50.0] == pytest.approx(100.0 * 2 / 3)
        assert s.n_failures == 1

    def test_even_count_median_with_midpoint_failure(self):
        s = summarize(records_cm([5, 15, INF, INF]))
        assert math.isinf(s.median_distance_cm)

    def test_boundary_is_inclusive(self):
        s = summarize(records_cm([10.0, 10.0 + 1e-9]))
        assert s.precision_at[10.0] == pytest.approx(50.0)

    def test_empty_selection(self):
        with pytest.raises(EmptySelectionError):
            summarize([])
        with pytest.raises(EmptySelectionError):
            summarize(records_cm([5.0]), tag_filter="nope")

    def test_tag_filter(self):
        recs = records_cm([5, 15], tags=("glasses",)) + records_cm([25, 60], tags=("no_glasses",))
        s = summarize(recs, "glasses")
        assert s.n_frames == 2
        assert s.median_distance_cm == pytest.approx(10.0)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        recs = records_cm(list(rng.uniform(0, 80, 41)))
        a = summarize(recs)
        shuffled = list(recs)
        rng.shuffle(shuffled)
        b = summarize(shuffled)
        assert a == b

    def test_median_robust_to_tail_inflation(self):
        values = [5.0, 12.0, 20.0, 33.0, 47.0]
        base = summarize(records_cm(values)).median_distance_cm
        inflated = summarize(records_cm(values[:-1] + [4700.0])).median_distance_cm
        assert base == inflated

    def test_tag_partition_weighted_mean(self):
        rng = np.random.default_rng(2)
        recs = []
        for k in range(120):
            tag = ("a",) if k % 3 else ("b",)
            recs.append(
                EvalRecord(f"f{k:03d}", "m", float(rng.uniform(0, 40)), float(rng.uniform(0, 1)), frozenset(tag))
            )
        total = summarize(recs)
        sa, sb = summarize(recs, "a"), summarize(recs, "b")
        combined = (sa.mean_angular_deg * sa.n_frames + sb.mean_angular_deg * sb.n_frames) / total.n_frames
        assert total.mean_angular_deg == pytest.approx(combined, rel=1e-12)

    def test_precision_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        values = list(rng.uniform(0, 100, 37)) + [INF] * 3
        s = summarize(records_cm(values), thresholds_cm=np.linspace(1, 120, 25))
        fractions = [s.precision_at[t] for t in sorted(s.precision_at)]
        assert all(a <= b for a, b in zip(fractions, fractions[1:]))


class TestErrorCdf:
    def test_three_values(self):
        cdf = error_cdf(records_cm([100, 200, 300]), "distance")
        assert cdf == [(100.0, 1 / 3), (200.0, 2 / 3), (300.0, 1.0)]

    def test_single_record(self):
        cdf = error_cdf([record(0.0, angle=4.5)], "angular")
        assert cdf == [(4.5, 1.0)]

    def test_failures_cap_the_curve(self):
        cdf = error_cdf(records_cm([100, 200, INF]), "distance")
        assert cdf[-1][1] == pytest.approx(2 / 3)

    def test_sorted_and_monotone(self):
        rng = np.random.default_rng(5)
        cdf = error_cdf(records_cm(list(rng.uniform(0, 50, 100))), "distance")
        ts = [t for t, _ in cdf]
        fs = [f for _, f in cdf]
        assert ts == sorted(ts)
        assert all(a <= b for a, b in zip(fs, fs[1:]))

    def test_precision_equals_cdf_at_thresholds(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(1, 60))
            values = list(rng.uniform(0, 80, n))
            if rng.random() < 0.3:
                values += [INF] * int(rng.integers(1, 4))
            recs = records_cm(values)
            cdf = error_cdf(recs, "distance")
            s = summarize(recs)
            for x in (10.0, 20.0, 50.0):
                assert s.precision_at[x] == pytest.approx(100.0 * cdf_fraction_at(cdf, x), abs=1e-12)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            error_cdf(records_cm([1.0]), "sideways")


class TestYawPitchHistogram:
    def test_single_direction_single_bin(self):
        hist = yaw_pitch_histogram([np.array([0, 0, -1.0])] * 7)
        assert hist.counts.sum() == 7
        yi = np.searchsorted(hist.yaw_edges, 0.0, side="right") - 1
        pi = np.searchsorted(hist.pitch_edges, 0.0, side="right") - 1
        assert hist.counts[yi, pi] == 7

    def test_total_count_preserved(self):
        rng = np.random.default_rng(7)
        dirs = rng.normal(size=(500, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        hist = yaw_pitch_histogram(dirs)
        assert hist.counts.sum() == 500

    def test_pitch_continues_past_negative_ninety(self):
        d = yaw_pitch_to_dir(0.0, math.radians(-100.0))
        yp = continued_yaw_pitch_deg(d)
        assert yp[0] == pytest.approx(0.0, abs=1e-9)
        assert yp[1] == pytest.approx(-100.0, abs=1e-9)

    def test_tabletop_truth_concentrates_at_negative_pitch(self, small_dataset):
        dirs = np.array([t.direction_cc for t in small_dataset.truths])
        hist = yaw_pitch_histogram(dirs)
        pitch_centers = (hist.pitch_edges[:-1] + hist.pitch_edges[1:]) / 2
        below = hist.counts[:, pitch_centers < 0].sum()
        assert below / hist.counts.sum() > 0.95

    def test_empty_input(self):
        with pytest.raises(EmptySelectionError):
            yaw_pitch_histogram(np.zeros((0, 3)))
