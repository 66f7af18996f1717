"""
Tests for cell grids, RANSAC proposals, deduplication and the fallback
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from rigidpath.candidates import (
    ORIGIN_CELL,
    ORIGIN_COMBO,
    ORIGIN_FALLBACK,
    ClipContext,
    RansacParams,
    adaptive_bound,
    build_grid,
    deduplicate,
    format_candidate_dump,
    global_ransac_baseline,
    jaccard,
    propose_cell_motion,
    propose_clip_candidates,
    ransac_motion,
    required_positive,
    work_rng,
)
from rigidpath.candidates import proposer
from rigidpath.candidates.proposer import _consistent_combos
from rigidpath.candidates.ransac import screening_pairs
from rigidpath.clips import generate_clips
from rigidpath.geometry import GeometryParams, RigidMotion
from rigidpath.synth import BACKGROUND_GROUP
from rigidpath.trajcore import TrackArray, VideoMeta
from tests.conftest import line_trajectory

FAST = RansacParams(iterations=60)


def motion_with(members, index=0):
    return RigidMotion(index, {}, member_ids=frozenset(members))


class TestGrid:
    def test_default_grid(self):
        grid = build_grid(VideoMeta(640, 480, 10))
        assert grid.cell_size == 128.0
        xs = sorted({c.x0 for c in grid.cells})
        ys = sorted({c.y0 for c in grid.cells})
        assert len(xs) == 7 and len(ys) == 5
        assert np.allclose(np.diff(xs), 128.0 * 0.7)
        for cell in grid.cells:
            assert 0 <= cell.x0 < cell.x1 <= 640
            assert 0 <= cell.y0 < cell.y1 <= 480

    def test_every_pixel_is_covered(self, rng):
        meta = VideoMeta(333, 211, 10)
        grid = build_grid(meta, cell_size=50.0, overlap_ratio=0.2)
        points = rng.random((2000, 2)) * (333, 211)
        points = np.vstack([points, [[0, 0], [333, 211], [333, 0], [0, 211]]])
        covered = np.logical_or.reduce([cell.contains(points) for cell in grid.cells])
        assert covered.all()

    def test_cell_origin_label(self):
        grid = build_grid(VideoMeta(100, 100, 5), cell_size=50.0, overlap_ratio=0.0)
        assert [c.origin for c in grid.cells] == ["0,0", "50,0", "0,50", "50,50"]

    @pytest.mark.parametrize("kwargs", [{"overlap_ratio": 1.0}, {"overlap_ratio": -0.1},
                                        {"cell_size": -5.0}])
    def test_invalid_grid(self, kwargs):
        with pytest.raises(ValueError):
            build_grid(VideoMeta(100, 100, 5), **kwargs)


def test_work_rng_depends_only_on_its_key():
    a = work_rng(7, 2, (3,)).random(4)
    assert np.array_equal(a, work_rng(7, 2, (3,)).random(4))
    assert not np.array_equal(a, work_rng(7, 2, (4,)).random(4))
    assert not np.array_equal(a, work_rng(7, 3, (3,)).random(4))
    assert not np.array_equal(work_rng(7, 2, ()).random(4), work_rng(7, 2, (0, 0)).random(4))


class TestProposal:
    def test_too_few_trajectories_are_skipped(self, background_scene, background_prepared):
        clips, _, tracks = background_prepared
        context = ClipContext(clips[0], tracks, GeometryParams())
        ids = context.full_ids[:7]
        assert propose_cell_motion(context, ids, FAST, work_rng(0, 0, (0,))) is None

    def test_rigid_region_is_accepted(self, background_prepared):
        clips, _, tracks = background_prepared
        context = ClipContext(clips[0], tracks, GeometryParams())
        ids = context.full_ids
        motion = propose_cell_motion(context, ids, FAST, work_rng(0, 0, (0,)), cell_origin="0,0")
        assert motion is not None
        assert set(ids.tolist()) <= motion.member_ids
        assert motion.member_ids <= set(tracks.ids[context.visible_rows].tolist())
        assert motion.origin == ORIGIN_CELL and motion.cell_origin == "0,0"
        assert all(err < 1e-3 for tid, err in motion.member_errors.items() if tid in set(ids.tolist()))

    def test_clip_candidates_cover_the_background(self, background_scene, background_prepared):
        _, meta, _, _ = background_scene
        clips, _, tracks = background_prepared
        grid = build_grid(meta)
        candidates = propose_clip_candidates(clips[0], tracks, grid, GeometryParams(), FAST)
        assert candidates
        assert all(m.origin != ORIGIN_FALLBACK for m in candidates)
        full = set(ClipContext(clips[0], tracks, GeometryParams()).full_ids.tolist())
        assert max(len(m.member_ids & full) for m in candidates) == len(full)

    def test_candidates_do_not_depend_on_threads(self, two_body_scene):
        _, meta, trajs, _ = two_body_scene
        clips = generate_clips(trajs, meta)
        tracks = TrackArray(trajs, meta.frame_count)
        grid = build_grid(meta)
        params = RansacParams(iterations=40, combo_budget=10, rng_seed=11)

        def summary(executor):
            found = propose_clip_candidates(clips[0], tracks, grid, GeometryParams(), params, executor)
            return [(m.origin, m.cell_origin, m.member_ids) for m in found]

        serial = summary(None)
        with ThreadPoolExecutor(max_workers=4) as pool:
            assert summary(pool) == serial
        assert summary(None) == serial


class TestFallback:
    def test_empty_candidate_when_nothing_is_estimable(self):
        meta = VideoMeta(100, 80, 10)
        trajs = [line_trajectory(i, 0, 10, origin=(10.0 + 5 * i, 10.0 + 3 * i)) for i in range(7)]
        clips = generate_clips(trajs, meta)
        tracks = TrackArray(trajs, meta.frame_count)
        candidates = propose_clip_candidates(clips[0], tracks, build_grid(meta), GeometryParams(), FAST)
        assert len(candidates) == 1
        assert candidates[0].origin == ORIGIN_FALLBACK
        assert candidates[0].member_ids == frozenset()
        assert len(candidates[0].matrices) == 0


class TestDeduplicate:
    def test_larger_near_duplicate_survives(self):
        a = motion_with(range(10))
        b = motion_with(range(11))
        c = motion_with(range(20, 26))
        assert deduplicate([a, b, c], 0.9) == [b, c]

    def test_earlier_wins_ties(self):
        a = motion_with(range(10))
        b = motion_with(range(10))
        assert deduplicate([a, b], 0.9) == [a]

    def test_distinct_sets_are_kept_in_order(self):
        motions = [motion_with({1, 2}), motion_with({1, 2, 3, 4, 5}), motion_with({9})]
        assert deduplicate(motions, 0.9) == motions

    def test_jaccard(self):
        assert jaccard(frozenset(), frozenset()) == 1.0
        assert jaccard(frozenset({1, 2}), frozenset({2, 3})) == pytest.approx(1 / 3)


def test_candidate_dump():
    motions = [[motion_with({1, 2, 3})], [RigidMotion(1, {}, frozenset({4}), origin="combo",
                                                      cell_origin="0,0+89.6,0")]]
    assert format_candidate_dump(motions) == "0 - 3 cell\n1 0,0+89.6,0 1 combo\n"


def test_baseline_keeps_long_background_trajectories(background_scene, background_prepared):
    _, meta, trajs, _ = background_scene
    clips, _, tracks = background_prepared
    labels = global_ransac_baseline(clips, tracks, GeometryParams(), FAST)
    assert set(labels) == {t.id for t in trajs}
    whole = [t.id for t in trajs if t.start_frame == 0 and t.end_frame == meta.frame_count - 1]
    assert whole
    assert all(labels[tid] == 1 for tid in whole)


@pytest.mark.parametrize("kwargs", [{"iterations": 0}, {"sample_size": 7},
                                    {"inlier_ratio_accept": 0.0}, {"max_combo": 0},
                                    {"dedup_jaccard": 1.5}])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        RansacParams(**kwargs)


class TestEarlyStop:
    def test_adaptive_bound(self):
        assert adaptive_bound(0.8, 8, 0.999) == 38
        assert adaptive_bound(1.0, 8, 0.999) == 1
        assert adaptive_bound(0.0, 8, 0.999) == math.inf
        assert adaptive_bound(0.5, 8, 0.99) > adaptive_bound(0.8, 8, 0.99)

    def test_required_positive(self):
        assert required_positive(25, 0.9) == 23
        assert required_positive(10, 0.9) == 10
        assert required_positive(3, 1.0) == 4

    def test_screening_pairs_spread_over_the_clip(self):
        assert screening_pairs(45, 4).tolist() == [0, 15, 29, 44]
        assert screening_pairs(3, 4).tolist() == [0, 1, 2]

    def test_clean_region_stops_after_one_chunk(self, background_prepared):
        clips, _, tracks = background_prepared
        context = ClipContext(clips[0], tracks, GeometryParams())
        positions = context.window[tracks.rows(context.full_ids)]
        params = RansacParams()
        early = ransac_motion(positions, context.pairs, clips[0].first, GeometryParams(), params,
                              work_rng(0, 0, (0,)))
        assert early.hypotheses == params.hypothesis_chunk < params.iterations
        assert early.count == len(positions)

        exhaustive = ransac_motion(positions, context.pairs, clips[0].first, GeometryParams(),
                                   RansacParams(iterations=64, adaptive=False), work_rng(0, 0, (0,)))
        assert exhaustive.hypotheses == 64

    def test_screening_keeps_the_exhaustive_winner(self, two_body_scene):
        _, meta, trajs, _ = two_body_scene
        clips = generate_clips(trajs, meta)
        tracks = TrackArray(trajs, meta.frame_count)
        context = ClipContext(clips[0], tracks, GeometryParams())
        positions = context.window[tracks.rows(context.full_ids)]

        def run(screen_pairs):
            params = RansacParams(iterations=80, adaptive=False, screen_pairs=screen_pairs)
            return ransac_motion(positions, context.pairs, clips[0].first, GeometryParams(), params,
                                 work_rng(5, 0, (1,)))

        screened, scored = run(2), run(len(context.pairs))
        assert screened.count == scored.count
        assert np.array_equal(screened.inliers, scored.inliers)
        np.testing.assert_allclose(screened.stack, scored.stack, atol=1e-12)


class TestCandidateInvariants:
    @pytest.fixture
    def first_clip(self, two_body_scene):
        _, meta, trajs, truth = two_body_scene
        clips = generate_clips(trajs, meta)
        tracks = TrackArray(trajs, meta.frame_count)
        return meta, truth, clips[0], tracks

    def test_even_two_body_region_is_rejected(self, first_clip):
        _, truth, clip, tracks = first_clip
        context = ClipContext(clip, tracks, GeometryParams())
        full = context.full_ids.tolist()
        box = [tid for tid in full if truth.labels[tid] == "box"][:30]
        background = [tid for tid in full if truth.labels[tid] == BACKGROUND_GROUP][:30]
        assert len(box) == len(background) == 30
        params = RansacParams(iterations=200)
        assert propose_cell_motion(context, box + background, params, work_rng(0, 0, (0,))) is None
        # each half on its own is one rigid motion
        assert propose_cell_motion(context, background, params, work_rng(0, 0, (1,))) is not None

    def test_accepted_candidates_hold_their_cells(self, first_clip):
        meta, _, clip, tracks = first_clip
        grid = build_grid(meta)
        cells = {cell.origin: cell for cell in grid.cells}
        context = ClipContext(clip, tracks, GeometryParams())
        start, full = context.start_points(), context.full_ids
        params = RansacParams(iterations=60, combo_budget=20)
        candidates = propose_clip_candidates(clip, tracks, grid, GeometryParams(), params)
        checked = 0
        for motion in candidates:
            if motion.origin == ORIGIN_FALLBACK:
                continue
            inside = np.logical_or.reduce([cells[o].contains(start) for o in motion.cell_origin.split("+")])
            source = set(full[inside].tolist())
            assert len(source & motion.member_ids) > 0.8 * len(source)
            checked += 1
        assert checked

    def test_combinations_use_accepted_cells_only(self, first_clip, mocker):
        meta, _, clip, tracks = first_clip
        calls = []
        real = proposer.propose_cell_motion

        def recording(context, ids, params, rng, **kwargs):
            motion = real(context, ids, params, rng, **kwargs)
            calls.append((kwargs.get("origin"), kwargs.get("cell_origin", "-"), motion is not None))
            return motion

        mocker.patch("rigidpath.candidates.proposer.propose_cell_motion", side_effect=recording)
        params = RansacParams(iterations=60, combo_budget=40)
        propose_clip_candidates(clip, tracks, build_grid(meta), GeometryParams(), params)
        accepted = {cell for origin, cell, ok in calls if origin == ORIGIN_CELL and ok}
        combos = [cell.split("+") for origin, cell, _ in calls if origin == ORIGIN_COMBO]
        assert accepted
        assert all(set(parts) <= accepted for parts in combos)

    def test_consistency_is_the_shared_member_share(self):
        accepted = {0: motion_with(range(10)), 1: motion_with(list(range(5)) + list(range(20, 25))),
                    2: motion_with(range(30, 40))}
        assert _consistent_combos(accepted, RansacParams(consistency_ratio=0.5)) == [(0, 1)]
        assert _consistent_combos(accepted, RansacParams(consistency_ratio=0.6)) == []
