"""
Path labels, the reliable background set and the whole-video background motion
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Tuple

import numpy as np
from loguru import logger

from rigidpath.errors import InsufficientBackgroundError, NoReliableBackgroundError
from rigidpath.geometry import (
    FundamentalMatrix,
    FramePair,
    GeometryParams,
    RigidMotion,
    epipolar_distances,
    estimate_fundamental_batch,
    frame_pairs,
    membership_scores,
)
from rigidpath.labeling.labels import LabelStage, LabelState
from rigidpath.motiongraph import MotionPath
from rigidpath.trajcore import SubTrajectoryTable, TrackArray

MIN_CORRESPONDENCES = 8


@dataclass
class BackgroundParams:
    """Global background model fitting"""
    min_pair_coverage: float = 0.5  # warn below this share of fitted pairs
    trim: bool = True

    def __post_init__(self):
        if not 0 <= self.min_pair_coverage <= 1:
            raise ValueError(f"min_pair_coverage must be in [0, 1], got {self.min_pair_coverage}")


@dataclass(frozen=True)
class GlobalBackgroundMotion:
    """Pairwise matrices over the whole video fitted from the reliable background"""
    matrices: Dict[FramePair, FundamentalMatrix]
    reliable_ids: FrozenSet[int]
    omitted_pairs: Tuple[FramePair, ...] = field(default=())

    def as_motion(self) -> RigidMotion:
        return RigidMotion(-1, self.matrices, member_ids=self.reliable_ids, origin="global")


def _path_membership(path: MotionPath, subvalues: SubTrajectoryTable, trajectory_id: int):
    return [trajectory_id in path.motion(clip).member_ids for clip in subvalues.clips_of(trajectory_id)]


def path_labels(path: MotionPath, subvalues: SubTrajectoryTable) -> LabelState:
    """Background where at least one sub-trajectory belongs to the path's candidate"""
    labels = {tid: int(any(_path_membership(path, subvalues, tid)))
              for tid in subvalues.trajectory_ids()}
    return LabelState(LabelStage.PATH, labels)


def reliable_background_ids(path: MotionPath, subvalues: SubTrajectoryTable) -> FrozenSet[int]:
    """
    Trajectories entirely covered by the dominant path

    Raises:
        NoReliableBackgroundError: no trajectory is a member in every clip it spans
    """
    reliable = frozenset(tid for tid in subvalues.trajectory_ids()
                         if all(_path_membership(path, subvalues, tid)))
    if not reliable:
        raise NoReliableBackgroundError("No trajectory is covered by the dominant path in all of its clips")
    logger.info(f"{len(reliable)} reliable background trajectories")
    return reliable


def _fit_pair(points_j: np.ndarray, points_k: np.ndarray, geometry: GeometryParams, trim: bool):
    F, valid = estimate_fundamental_batch(points_j[None], points_k[None], geometry.max_condition,
                                          geometry.max_collinear_fraction)
    if not valid[0]:
        return None
    if trim:
        errors = epipolar_distances(F[0], points_j, points_k)
        keep = errors < geometry.epsilon_f
        if MIN_CORRESPONDENCES <= keep.sum() < len(keep):
            refit, ok = estimate_fundamental_batch(points_j[keep][None], points_k[keep][None],
                                                   geometry.max_condition,
                                                   geometry.max_collinear_fraction)
            if ok[0]:
                return refit[0]
    return F[0]


def fit_global_motion(reliable_ids: Iterable[int], tracks: TrackArray, geometry: GeometryParams = None,
                      params: BackgroundParams = None) -> GlobalBackgroundMotion:
    """
    Fit every frame pair (j, k), 0 < k - j <= r, of the video from reliable trajectories

    Pairs seen by fewer than eight reliable trajectories are omitted and the
    model judges trajectories on the fitted pairs only. A warning is logged
    when fewer than min_pair_coverage of the pairs could be fitted.

    Raises:
        InsufficientBackgroundError: fewer than eight reliable trajectories, or
            no pair could be fitted
    """
    geometry = geometry or GeometryParams()
    params = params or BackgroundParams()
    reliable = frozenset(int(t) for t in reliable_ids)
    pairs = frame_pairs(0, tracks.frame_count - 1, geometry.r)
    diagnostics = {"reliable": len(reliable), "pairs_total": len(pairs)}
    if len(reliable) < MIN_CORRESPONDENCES:
        raise InsufficientBackgroundError(
            f"Only {len(reliable)} reliable background trajectories", {**diagnostics, "pairs_fitted": 0})

    positions = tracks.positions[tracks.rows(sorted(reliable))]
    present = np.isfinite(positions[..., 0])

    matrices: Dict[FramePair, FundamentalMatrix] = {}
    omitted = []
    for j, k in pairs:
        both = present[:, j] & present[:, k]
        F = None
        if both.sum() >= MIN_CORRESPONDENCES:
            F = _fit_pair(positions[both, j], positions[both, k], geometry, params.trim)
        if F is None:
            omitted.append((j, k))
        else:
            matrices[(j, k)] = FundamentalMatrix((j, k), F)

    diagnostics["pairs_fitted"] = len(matrices)
    coverage = len(matrices) / len(pairs) if pairs else 0.0
    if not matrices:
        raise InsufficientBackgroundError("Background model could not fit any frame pair", diagnostics)
    if coverage < params.min_pair_coverage:
        logger.warning(f"Background model covers only {len(matrices)}/{len(pairs)} frame pairs, "
                       f"trajectories outside them are labeled foreground")
    elif omitted:
        logger.warning(f"Background model omits {len(omitted)}/{len(pairs)} frame pairs")
    logger.info(f"Fitted background model on {len(matrices)} frame pairs")
    return GlobalBackgroundMotion(matrices, reliable, tuple(omitted))


def label_all(tracks: TrackArray, background: GlobalBackgroundMotion,
              geometry: GeometryParams = None) -> LabelState:
    """Background where a trajectory passes the membership test against the whole-video model"""
    geometry = geometry or GeometryParams()
    scores = membership_scores(tracks.positions, background.as_motion(), geometry)
    labels = {int(tid): int(member) for tid, member in zip(tracks.ids, scores.member)}
    logger.info(f"Global model labeled {int(scores.member.sum())}/{len(labels)} trajectories as background")
    return LabelState(LabelStage.GLOBAL, labels)
