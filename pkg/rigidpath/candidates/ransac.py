"""
RANSAC estimation of one rigid motion from the full-length trajectories of a clip region
"""

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple

import numpy as np
from loguru import logger

from rigidpath.clips import Clip
from rigidpath.geometry import (
    FundamentalMatrix,
    GeometryParams,
    RigidMotion,
    epipolar_distances,
    estimate_fundamental_batch,
    fit_pair_matrices,
    frame_pairs,
    membership_scores,
)
from rigidpath.trajcore import TrackArray

SEED_MASK = 0xFFFFFFFFFFFFFFFF
# upper bound on hypotheses x pairs x trajectories scored per vectorized step
SCORE_BUDGET = 2_000_000


@dataclass
class RansacParams:
    """Candidate proposal parameters"""
    iterations: int = 500
    sample_size: int = 8
    inlier_ratio_accept: float = 0.8
    rng_seed: int = 0
    max_combo: int = 3
    combo_budget: int = 200
    max_consistent_combos: int = 500
    consistency_ratio: float = 0.5
    dedup_jaccard: float = 0.9
    cell_size: Optional[float] = None
    overlap_ratio: float = 0.3
    hypothesis_chunk: int = 16
    adaptive: bool = True
    confidence: float = 0.999
    screen_pairs: int = 4

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.sample_size < 8:
            raise ValueError(f"sample_size must be >= 8, got {self.sample_size}")
        if not 0 < self.inlier_ratio_accept <= 1:
            raise ValueError(f"inlier_ratio_accept must be in (0, 1], got {self.inlier_ratio_accept}")
        if self.max_combo < 1:
            raise ValueError(f"max_combo must be >= 1, got {self.max_combo}")
        if self.combo_budget < 0 or self.max_consistent_combos < 0:
            raise ValueError("Combination budgets must be non-negative")
        if not 0 < self.consistency_ratio <= 1 or not 0 < self.dedup_jaccard <= 1:
            raise ValueError("consistency_ratio and dedup_jaccard must be in (0, 1]")
        if self.hypothesis_chunk < 1:
            raise ValueError(f"hypothesis_chunk must be >= 1, got {self.hypothesis_chunk}")
        if not 0 < self.confidence < 1:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.screen_pairs < 1:
            raise ValueError(f"screen_pairs must be >= 1, got {self.screen_pairs}")


def work_rng(seed: int, clip_index: int, key: Iterable[int]) -> np.random.Generator:
    """Generator for one work item, independent of scheduling order"""
    key = tuple(int(k) for k in key)
    return np.random.default_rng([int(seed) & SEED_MASK, int(clip_index), len(key), *key])


class ClipContext:
    """Window views of a TrackArray shared by every RANSAC run of one clip"""

    def __init__(self, clip: Clip, tracks: TrackArray, geometry: GeometryParams):
        self.clip = clip
        self.tracks = tracks
        self.geometry = geometry
        self.window = tracks.positions[:, clip.first:clip.last + 1]
        self.pairs = np.array(frame_pairs(clip.first, clip.last, geometry.r), dtype=np.int64).reshape(-1, 2)
        self.full_rows = tracks.full_rows(clip.first, clip.last)
        self.visible_rows = tracks.visible_rows(clip.first, clip.last)

    @property
    def full_ids(self) -> np.ndarray:
        return self.tracks.ids[self.full_rows]

    def start_points(self) -> np.ndarray:
        """(m, 2) positions of the full-length trajectories at the clip's first frame"""
        return self.window[self.full_rows, 0]

    def extend(self, motion: RigidMotion) -> RigidMotion:
        """Attach every visible trajectory that passes the membership test"""
        scores = membership_scores(self.window[self.visible_rows], motion, self.geometry,
                                   frame_offset=self.clip.first)
        ids = self.tracks.ids[self.visible_rows]
        members = ids[scores.member]
        errors = {int(tid): float(err) for tid, err in zip(members, scores.mean_error[scores.member])}
        return motion.with_members(members.tolist(), errors)


class RansacOutcome(NamedTuple):
    stack: np.ndarray
    inliers: np.ndarray
    count: int
    hypotheses: int


def adaptive_bound(inlier_ratio: float, sample_size: int, confidence: float) -> float:
    """Hypotheses needed to draw one all-inlier sample with the given confidence"""
    hit = inlier_ratio ** sample_size if inlier_ratio > 0 else 0.0
    if hit >= 1.0:
        return 1.0
    if hit <= 0.0:
        return math.inf
    return math.ceil(math.log1p(-confidence) / math.log1p(-hit))


def required_positive(n_pairs: int, theta: float) -> int:
    """Smallest positive-match count that passes the ratio test over n_pairs matches"""
    counts = np.arange(n_pairs + 1)
    passing = counts[counts / max(n_pairs, 1) > theta]
    return int(passing[0]) if len(passing) else n_pairs + 1


def screening_pairs(n_pairs: int, count: int) -> np.ndarray:
    """Indices of `count` frame pairs spread evenly over the clip"""
    if count >= n_pairs:
        return np.arange(n_pairs)
    return np.unique(np.linspace(0, n_pairs - 1, count).round().astype(np.int64))


def _estimate(points_j: np.ndarray, points_k: np.ndarray, batch: np.ndarray, columns: np.ndarray,
              geometry: GeometryParams) -> Tuple[np.ndarray, np.ndarray]:
    b, c = len(batch), len(columns)
    sample_j = np.transpose(points_j[columns][:, batch], (1, 0, 2, 3)).reshape(b * c, -1, 2)
    sample_k = np.transpose(points_k[columns][:, batch], (1, 0, 2, 3)).reshape(b * c, -1, 2)
    F, valid = estimate_fundamental_batch(sample_j, sample_k, geometry.max_condition,
                                          geometry.max_collinear_fraction)
    return F.reshape(b, c, 3, 3), valid.reshape(b, c)


def ransac_motion(positions: np.ndarray, pairs: np.ndarray, first: int, geometry: GeometryParams,
                  params: RansacParams, rng: np.random.Generator,
                  min_ratio: Optional[float] = None) -> Optional[RansacOutcome]:
    """
    Best-consensus hypothesis over minimal samples of full-length trajectories

    Each hypothesis is first fitted and scored on a few screening pairs. A
    member of the hypothesis can fail at most as many screening pairs as the
    ratio test tolerates over all pairs, so the screened count bounds the
    full count from above; only hypotheses whose bound beats the current
    best are fitted on every pair. With `adaptive`, sampling stops once the
    number of hypotheses drawn would have produced an all-inlier sample
    with probability `confidence`, given the best inlier ratio so far (never
    below `min_ratio`).

    Args:
        positions: (m, window, 2) positions with no gaps inside the window
        pairs: (P, 2) absolute frame pairs of the window
        first: Absolute frame index of window column 0
        geometry: Membership test parameters
        params: Iteration cap, sample size and early stop settings
        rng: Source of the samples
        min_ratio: Smallest inlier ratio worth finding (the acceptance ratio)

    Returns:
        RansacOutcome with the hypothesis matrices and its inlier mask, or None
        when every hypothesis was degenerate
    """
    m = positions.shape[0]
    n_pairs = len(pairs)
    if m < params.sample_size or n_pairs == 0:
        return None

    local = pairs - first
    points_j = np.transpose(positions[:, local[:, 0]], (1, 0, 2))
    points_k = np.transpose(positions[:, local[:, 1]], (1, 0, 2))
    testable = n_pairs >= geometry.min_tested_pairs
    screen = screening_pairs(n_pairs, params.screen_pairs)
    rest = np.setdiff1d(np.arange(n_pairs), screen)
    screen_need = len(screen) - (n_pairs - required_positive(n_pairs, geometry.theta_member))
    chunk = max(1, min(params.hypothesis_chunk, SCORE_BUDGET // max(1, len(screen) * m)))

    best: Optional[RansacOutcome] = None
    drawn = 0
    for start in range(0, params.iterations, chunk):
        draws = rng.random((min(chunk, params.iterations - start), m))
        batch = np.argpartition(draws, params.sample_size - 1, axis=1)[:, :params.sample_size]
        drawn += len(batch)
        F_screen, valid_screen = _estimate(points_j, points_k, batch, screen, geometry)
        with np.errstate(invalid="ignore"):
            errors = epipolar_distances(F_screen, points_j[screen], points_k[screen])
        passed = (errors < geometry.epsilon_f).sum(axis=1) >= screen_need
        upper = passed.sum(axis=1) if testable else np.zeros(len(batch), dtype=np.int64)
        floor = -1 if best is None else best.count
        promising = np.flatnonzero(valid_screen.all(axis=1) & (upper > floor))
        group = max(1, SCORE_BUDGET // (n_pairs * m))

        for lo in range(0, len(promising), group):
            picked = promising[lo:lo + group]
            picked = picked[upper[picked] > floor]
            if not len(picked):
                continue
            F = np.empty((len(picked), n_pairs, 3, 3))
            F[:, screen] = F_screen[picked]
            usable = np.ones(len(picked), dtype=bool)
            if len(rest):
                F_rest, valid_rest = _estimate(points_j, points_k, batch[picked], rest, geometry)
                F[:, rest] = F_rest
                usable = valid_rest.all(axis=1)
            with np.errstate(invalid="ignore"):
                errors = epipolar_distances(F, points_j, points_k)
            positive = (errors < geometry.epsilon_f).sum(axis=1)
            member = testable & (positive / n_pairs > geometry.theta_member)
            counts = np.where(usable, member.sum(axis=1), -1)

            winner = int(np.argmax(counts))
            if counts[winner] > floor:
                best = RansacOutcome(F[winner], member[winner], int(counts[winner]), drawn)
                floor = best.count

        if params.adaptive:
            ratio = best.count / m if best is not None else 0.0
            if min_ratio is not None:
                ratio = max(ratio, min_ratio)
            if drawn >= adaptive_bound(ratio, params.sample_size, params.confidence):
                break

    if best is not None:
        best = best._replace(hypotheses=drawn)
    return best


def propose_cell_motion(context: ClipContext, cell_traj_ids, params: RansacParams,
                        rng: np.random.Generator, accept: bool = True,
                        origin: str = "cell", cell_origin: str = "-") -> Optional[RigidMotion]:
    """
    Fit one rigid motion to the full-length trajectories of a cell (or cell union)

    Runs up to `iterations` RANSAC rounds on minimal samples. With `accept`, the
    best hypothesis must explain more than inlier_ratio_accept of the cell. The
    kept motion is refit on all inliers and extended to every trajectory
    visible in the clip.

    Args:
        context: Window views of the clip
        cell_traj_ids: Full-length trajectory ids in the region
        params: RANSAC parameters
        rng: Per-region generator
        accept: Apply the consensus threshold (False for the clip-wide fallback)
        origin: Candidate origin tag
        cell_origin: Printable region description

    Returns:
        RigidMotion with members and mean errors, or None when rejected
    """
    clip = context.clip
    ids = np.asarray(sorted(int(t) for t in cell_traj_ids), dtype=np.int64)
    if len(ids) < params.sample_size:
        logger.debug(f"Clip {clip.index} region {cell_origin}: {len(ids)} trajectories, skipped")
        return None

    positions = context.window[context.tracks.rows(ids)]
    outcome = ransac_motion(positions, context.pairs, clip.first, context.geometry, params, rng,
                            min_ratio=params.inlier_ratio_accept if accept else None)
    if outcome is None:
        logger.debug(f"Clip {clip.index} region {cell_origin}: every hypothesis degenerate")
        return None

    threshold = params.inlier_ratio_accept * len(ids)
    if accept and outcome.count <= threshold:
        logger.debug(f"Clip {clip.index} region {cell_origin}: consensus "
                     f"{outcome.count}/{len(ids)} after {outcome.hypotheses} hypotheses, rejected")
        return None

    matrices = {
        (int(j), int(k)): FundamentalMatrix((int(j), int(k)), outcome.stack[i])
        for i, (j, k) in enumerate(context.pairs)
    }
    refit, _ = fit_pair_matrices(positions[outcome.inliers], clip.first, clip.last, context.geometry)
    matrices.update(refit)

    motion = context.extend(RigidMotion(clip.index, matrices, origin=origin, cell_origin=cell_origin))
    if accept:
        covered = np.count_nonzero(np.isin(ids, list(motion.member_ids)))
        if covered <= threshold:
            logger.debug(f"Clip {clip.index} region {cell_origin}: refit kept "
                         f"{covered}/{len(ids)}, rejected")
            return None
    logger.debug(f"Clip {clip.index} region {cell_origin}: accepted with "
                 f"{len(motion.member_ids)} members")
    return motion
