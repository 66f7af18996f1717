"""
Tests for path labels, the global background model and the label filter
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from rigidpath.errors import InsufficientBackgroundError, NoReliableBackgroundError
from rigidpath.geometry import RigidMotion, frame_pairs
from rigidpath.labeling import (
    FilterParams,
    LabelStage,
    LabelState,
    filter_labels,
    fit_global_motion,
    label_all,
    neighbor_pairs,
    pair_weights,
    path_labels,
    reliable_background_ids,
)
from rigidpath.motiongraph import MotionPath
from rigidpath.trajcore import SubTrajectoryTable, SubTrajectoryValue, TrackArray, Trajectory, VideoMeta
from tests.conftest import line_trajectory

GRAY = (0.5, 0.5, 0.5)


def table(spans):
    return SubTrajectoryTable(
        SubTrajectoryValue(tid, ci, Fraction(1, len(clips)))
        for tid, clips in spans.items() for ci in clips
    )


def two_clip_path(first_members, second_members):
    motions = (RigidMotion(0, {}, frozenset(first_members)), RigidMotion(1, {}, frozenset(second_members)))
    return MotionPath((0, 0), 1.0, motions=motions)


class TestPathLabels:
    @pytest.fixture
    def subvalues(self):
        return table({1: (0, 1), 2: (0, 1), 3: (1,), 4: (0,), 5: (0, 1)})

    def test_any_clip_membership(self, subvalues):
        state = path_labels(two_clip_path({1, 2, 4}, {1, 3}), subvalues)
        assert state.stage == LabelStage.PATH
        assert state.labels == {1: 1, 2: 1, 3: 1, 4: 1, 5: 0}

    def test_reliable_needs_every_clip(self, subvalues):
        assert reliable_background_ids(two_clip_path({1, 2, 4}, {1, 3}), subvalues) == {1, 3, 4}

    def test_no_reliable_background(self, subvalues):
        with pytest.raises(NoReliableBackgroundError):
            reliable_background_ids(two_clip_path({2}, {1}), subvalues)


class TestGlobalMotion:
    def test_too_few_reliable(self, background_scene):
        _, meta, trajs, _ = background_scene
        tracks = TrackArray(trajs, meta.frame_count)
        with pytest.raises(InsufficientBackgroundError) as excinfo:
            fit_global_motion([t.id for t in trajs[:7]], tracks)
        assert excinfo.value.diagnostics["reliable"] == 7

    def test_half_coverage_labels_every_trajectory(self, background_scene):
        _, meta, trajs, _ = background_scene
        half = meta.frame_count // 2
        full = [t for t in trajs if t.start_frame == 0 and len(t) == meta.frame_count]
        assert len(full) >= 8
        early = [Trajectory(t.id, 0, t.points[:half]) for t in full]
        late = [Trajectory(t.id + 100_000, half, t.points[half:]) for t in full]
        tracks = TrackArray(early + late, meta.frame_count)

        background = fit_global_motion([t.id for t in early], tracks)
        pairs = frame_pairs(0, meta.frame_count - 1, 5)
        assert set(background.matrices) == {(j, k) for j, k in pairs if k < half}
        assert len(background.matrices) + len(background.omitted_pairs) == len(pairs)
        assert len(background.matrices) < len(pairs) / 2

        state = label_all(tracks, background)
        assert set(state.labels) == {t.id for t in early + late}
        assert all(state[t.id] == 1 for t in early)
        # nothing fitted covers the second half
        assert all(state[t.id] == 0 for t in late)

    def test_background_is_labeled_and_a_mover_is_not(self, background_scene):
        _, meta, trajs, _ = background_scene
        mover = Trajectory(10_000, 0, [[320.0, 100.0 + 15.0 * f] for f in range(10)])
        tracks = TrackArray(list(trajs) + [mover], meta.frame_count)
        background = fit_global_motion([t.id for t in trajs], tracks)
        assert not background.omitted_pairs
        assert len(background.matrices) == len(frame_pairs(0, meta.frame_count - 1, 5))

        state = label_all(tracks, background)
        assert state.stage == LabelStage.GLOBAL
        assert state[10_000] == 0
        long_ids = [t.id for t in trajs if len(t) >= 4]
        assert sum(state[tid] for tid in long_ids) == len(long_ids)
        # a two-frame trajectory has a single testable pair
        short_ids = [t.id for t in trajs if len(t) == 2]
        assert all(state[tid] == 0 for tid in short_ids)


def static_tracks(specs, frames=3):
    """TrackArray of motionless gray trajectories from [(id, (x, y))]"""
    trajs = [line_trajectory(tid, 0, frames, origin=xy, step=(0.0, 0.0), colors=GRAY) for tid, xy in specs]
    return TrackArray(trajs, frames)


class TestFilter:
    meta = VideoMeta(640, 480, 3)

    def test_surrounded_trajectory_flips_to_background(self):
        tracks = static_tracks([(0, (100.0, 100.0)), (1, (102.0, 100.0)), (2, (98.0, 100.0)),
                                (3, (100.0, 102.0)), (4, (100.0, 98.0))])
        state = LabelState(LabelStage.GLOBAL, {0: 0, 1: 1, 2: 1, 3: 1, 4: 1})
        filtered = filter_labels(state, tracks, self.meta)
        assert filtered.stage == LabelStage.FILTERED
        assert filtered[0] == 1

    def test_even_split_is_not_background(self):
        tracks = static_tracks([(0, (200.0, 200.0)), (1, (205.0, 200.0)), (2, (195.0, 200.0))])
        state = LabelState(LabelStage.GLOBAL, {0: 1, 1: 1, 2: 0})
        assert filter_labels(state, tracks, self.meta)[0] == 0

    def test_isolated_trajectory_keeps_its_label(self):
        tracks = static_tracks([(0, (200.0, 200.0)), (1, (205.0, 200.0)), (9, (600.0, 400.0))])
        state = LabelState(LabelStage.GLOBAL, {0: 0, 1: 0, 9: 1})
        assert filter_labels(state, tracks, self.meta)[9] == 1

    def test_updates_read_the_input_labels(self):
        # a chain 0 - 1 - 2 where only 2 is background: 0 only sees 1
        tracks = static_tracks([(0, (100.0, 100.0)), (1, (125.0, 100.0)), (2, (150.0, 100.0))])
        state = LabelState(LabelStage.GLOBAL, {0: 0, 1: 0, 2: 1})
        filtered = filter_labels(state, tracks, self.meta)
        assert filtered.labels == {0: 0, 1: 0, 2: 0}

    def test_color_difference_lowers_the_weight(self):
        trajs = [line_trajectory(0, 0, 2, origin=(100.0, 100.0), step=(0.0, 0.0), colors=GRAY),
                 line_trajectory(1, 0, 2, origin=(110.0, 100.0), step=(0.0, 0.0), colors=GRAY),
                 line_trajectory(2, 0, 2, origin=(90.0, 100.0), step=(0.0, 0.0), colors=(1.0, 0.0, 0.0))]
        tracks = TrackArray(trajs, 2)
        state = LabelState(LabelStage.GLOBAL, {0: 0, 1: 1, 2: 0})
        # equal distances: the same-colored background neighbour dominates
        assert filter_labels(state, tracks, self.meta)[0] == 1

    def test_disabled_filter_copies_labels(self):
        tracks = static_tracks([(0, (100.0, 100.0)), (1, (101.0, 100.0))])
        state = LabelState(LabelStage.GLOBAL, {0: 0, 1: 1})
        filtered = filter_labels(state, tracks, self.meta, FilterParams(enabled=False))
        assert filtered.stage == LabelStage.FILTERED
        assert filtered.labels == state.labels
        assert filtered.labels is not state.labels

    def test_second_pass_changes_almost_nothing(self, two_body_scene):
        _, meta, trajs, truth = two_body_scene
        tracks = TrackArray(trajs, meta.frame_count)
        once = filter_labels(LabelState(LabelStage.GLOBAL, truth.binary_labels()), tracks, meta)
        twice = filter_labels(once, tracks, meta)
        changed = sum(once[tid] != twice[tid] for tid in once.labels)
        assert changed < 0.01 * len(trajs)

    def test_flipping_a_label_only_reaches_its_neighbours(self, two_body_scene):
        _, meta, trajs, truth = two_body_scene
        tracks = TrackArray(trajs, meta.frame_count)
        labels = truth.binary_labels()
        pairs = neighbor_pairs(tracks, FilterParams().neighbor_dist(meta))
        row = len(tracks) // 2
        target = int(tracks.ids[row])
        near = {int(tracks.ids[b if a == row else a]) for a, b in pairs if row in (a, b)}

        before = filter_labels(LabelState(LabelStage.GLOBAL, labels), tracks, meta)
        flipped = dict(labels)
        flipped[target] = 1 - flipped[target]
        after = filter_labels(LabelState(LabelStage.GLOBAL, flipped), tracks, meta)
        differs = {tid for tid in labels if before[tid] != after[tid]}
        assert differs <= near | {target}

    def test_filter_distances_scale_with_width(self):
        params = FilterParams()
        assert params.neighbor_dist(self.meta) == pytest.approx(32.0)
        assert params.sigma_d(self.meta) == pytest.approx(12.8)


class TestNeighbours:
    def test_radius_is_strict(self):
        tracks = static_tracks([(0, (0.0, 0.0)), (1, (32.0, 0.0)), (2, (0.0, 31.5))])
        assert neighbor_pairs(tracks, 32.0).tolist() == [[0, 2]]

    def test_pairs_need_a_shared_frame(self):
        trajs = [line_trajectory(0, 0, 2, origin=(5.0, 5.0), step=(0.0, 0.0)),
                 line_trajectory(1, 2, 2, origin=(5.0, 5.0), step=(0.0, 0.0)),
                 line_trajectory(2, 1, 2, origin=(6.0, 5.0), step=(0.0, 0.0))]
        tracks = TrackArray(trajs, 4)
        assert neighbor_pairs(tracks, 3.0).tolist() == [[0, 2], [1, 2]]

    def test_weight_uses_largest_shared_distance(self):
        trajs = [Trajectory(0, 0, [[100.0, 100.0], [100.0, 100.0], [100.0, 100.0]]),
                 Trajectory(1, 1, [[103.0, 104.0], [100.0, 100.0]])]
        tracks = TrackArray(trajs, 3)
        weights = pair_weights(tracks, np.array([[0, 1]]), sigma_d=10.0, sigma_c=0.18)
        assert weights[0] == pytest.approx(math.exp(-25.0 / 200.0))


def test_label_state_coerces_values():
    state = LabelState("global", {3: True, 4: 0.0, 5: 2})
    assert state.stage == LabelStage.GLOBAL
    assert state.labels == {3: 1, 4: 0, 5: 1}
    assert state.background_ids() == {3, 5}
    assert state.changed(LabelState(LabelStage.FILTERED, {3: 1, 4: 1, 5: 0})) == 2
