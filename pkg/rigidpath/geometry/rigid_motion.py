"""
Rigid motions as sets of pairwise fundamental matrices, and the membership test
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from rigidpath.geometry.fundamental import (
    FundamentalMatrix,
    GeometryParams,
    epipolar_distances,
    estimate_fundamental_batch,
)
from rigidpath.trajcore import Trajectory

FramePair = Tuple[int, int]

# frame pairs evaluated per vectorized chunk in membership_scores
PAIR_CHUNK = 16


def frame_pairs(first: int, last: int, r: int) -> List[FramePair]:
    """All (j, k) with first <= j < k <= last and k - j <= r"""
    return [(j, k) for j in range(first, last + 1) for k in range(j + 1, min(j + r, last) + 1)]


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """A motion hypothesis for one clip: pairwise matrices plus member trajectories"""
    clip_index: int
    matrices: Mapping[FramePair, FundamentalMatrix]
    member_ids: FrozenSet[int] = frozenset()
    origin: str = "cell"
    cell_origin: str = "-"
    member_errors: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "member_ids", frozenset(self.member_ids))
        pairs = sorted(self.matrices)
        object.__setattr__(self, "_pairs", np.array(pairs, dtype=np.int64).reshape(-1, 2))
        stack = np.array([self.matrices[p].matrix for p in pairs]).reshape(-1, 3, 3)
        object.__setattr__(self, "_stack", stack)

    @property
    def pairs(self) -> np.ndarray:
        """(P, 2) absolute frame indices, sorted"""
        return self._pairs

    @property
    def stack(self) -> np.ndarray:
        """(P, 3, 3) matrices aligned with `pairs`"""
        return self._stack

    def frame_span(self) -> Optional[Tuple[int, int]]:
        if not len(self._pairs):
            return None
        return int(self._pairs.min()), int(self._pairs.max())

    def with_members(self, member_ids, member_errors: Mapping[int, float]) -> "RigidMotion":
        return replace(self, member_ids=frozenset(member_ids), member_errors=dict(member_errors))

    def mean_error(self, trajectory_id: int) -> Optional[float]:
        return self.member_errors.get(trajectory_id)


class MembershipScores(NamedTuple):
    """Per-trajectory results of the membership test"""
    tested: np.ndarray
    positive: np.ndarray
    mean_error: np.ndarray
    member: np.ndarray


def score_matrices(positions: np.ndarray, pairs: np.ndarray, stack: np.ndarray,
                   params: GeometryParams, frame_offset: int = 0) -> MembershipScores:
    """
    Membership test of many trajectories against one set of pairwise matrices

    Args:
        positions: (n, frames, 2) NaN-padded positions; column c is frame c + frame_offset
        pairs: (P, 2) absolute frame pairs
        stack: (P, 3, 3) matrices aligned with pairs
        params: Threshold and ratio of the test
        frame_offset: Absolute frame index of column 0

    Returns:
        MembershipScores with tested/positive counts, mean error of tested matches and the verdict
    """
    n = positions.shape[0]
    tested = np.zeros(n, dtype=np.int64)
    positive = np.zeros(n, dtype=np.int64)
    error_sum = np.zeros(n)

    for start in range(0, len(pairs), PAIR_CHUNK):
        chunk = pairs[start:start + PAIR_CHUNK] - frame_offset
        inside = (chunk >= 0).all(axis=1) & (chunk < positions.shape[1]).all(axis=1)
        if not inside.any():
            continue
        chunk = chunk[inside]
        F = stack[start:start + PAIR_CHUNK][inside]
        points_j = np.transpose(positions[:, chunk[:, 0]], (1, 0, 2))
        points_k = np.transpose(positions[:, chunk[:, 1]], (1, 0, 2))
        with np.errstate(invalid="ignore"):
            errors = epipolar_distances(F, points_j, points_k)
        valid = ~np.isnan(errors)
        tested += valid.sum(axis=0)
        positive += (valid & (errors < params.epsilon_f)).sum(axis=0)
        error_sum += np.where(valid, errors, 0.0).sum(axis=0)

    with np.errstate(invalid="ignore", divide="ignore"):
        mean_error = np.where(tested > 0, error_sum / np.maximum(tested, 1), np.nan)
        ratio = np.where(tested > 0, positive / np.maximum(tested, 1), 0.0)
    member = (tested >= params.min_tested_pairs) & (ratio > params.theta_member)
    return MembershipScores(tested, positive, mean_error, member)


def membership_scores(positions: np.ndarray, motion: RigidMotion, params: GeometryParams,
                      frame_offset: int = 0) -> MembershipScores:
    """Membership test of many trajectories against a RigidMotion"""
    return score_matrices(positions, motion.pairs, motion.stack, params, frame_offset)


def _single_positions(traj: Trajectory, first: int, last: int) -> np.ndarray:
    positions = np.full((1, last - first + 1, 2), np.nan)
    lo, hi = max(first, traj.start_frame), min(last, traj.end_frame)
    if lo <= hi:
        positions[0, lo - first:hi - first + 1] = traj.points[lo - traj.start_frame:hi - traj.start_frame + 1]
    return positions


def trajectory_scores(traj: Trajectory, motion: RigidMotion, params: GeometryParams) -> MembershipScores:
    """Membership scores of a single trajectory"""
    span = motion.frame_span()
    if span is None:
        empty = np.zeros(1, dtype=np.int64)
        return MembershipScores(empty, empty, np.full(1, np.nan), np.zeros(1, dtype=bool))
    return membership_scores(_single_positions(traj, *span), motion, params, frame_offset=span[0])


def is_member(traj: Trajectory, motion: RigidMotion, params: GeometryParams = None) -> bool:
    """
    Whether a trajectory moves with a rigid motion

    A match (p_j, p_k) is positive when its geometric error is below
    epsilon_f; the trajectory is a member when at least min_tested_pairs
    matches were tested and strictly more than theta_member of them are positive.
    """
    params = params or GeometryParams()
    return bool(trajectory_scores(traj, motion, params).member[0])


def fit_pair_matrices(positions: np.ndarray, first: int, last: int, params: GeometryParams
                      ) -> Tuple[Dict[FramePair, FundamentalMatrix], bool]:
    """
    Fit every pairwise matrix of a window from trajectories visible throughout it

    Args:
        positions: (m, last - first + 1, 2) positions of full-length trajectories
        first: First frame of the window
        last: Last frame of the window
        params: Pair gap and degeneracy thresholds

    Returns:
        tuple: (matrices by frame pair, True if every pair was estimable)
    """
    pairs = np.array(frame_pairs(first, last, params.r), dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        return {}, False
    local = pairs - first
    points_j = np.transpose(positions[:, local[:, 0]], (1, 0, 2))
    points_k = np.transpose(positions[:, local[:, 1]], (1, 0, 2))
    F, valid = estimate_fundamental_batch(points_j, points_k, params.max_condition,
                                          params.max_collinear_fraction)
    matrices = {
        (int(j), int(k)): FundamentalMatrix((int(j), int(k)), F[i])
        for i, (j, k) in enumerate(pairs) if valid[i]
    }
    return matrices, bool(valid.all())
