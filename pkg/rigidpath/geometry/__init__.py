"""
Epipolar motion model
"""

from rigidpath.geometry.fundamental import (
    FundamentalMatrix,
    GeometryParams,
    epipolar_distances,
    estimate_fundamental,
    estimate_fundamental_batch,
    geometric_error,
)
from rigidpath.geometry.rigid_motion import (
    FramePair,
    MembershipScores,
    RigidMotion,
    fit_pair_matrices,
    frame_pairs,
    is_member,
    membership_scores,
    score_matrices,
    trajectory_scores,
)

__all__ = [
    'FundamentalMatrix', 'GeometryParams', 'epipolar_distances', 'estimate_fundamental',
    'estimate_fundamental_batch', 'geometric_error', 'FramePair', 'MembershipScores',
    'RigidMotion', 'fit_pair_matrices', 'frame_pairs', 'is_member', 'membership_scores',
    'score_matrices', 'trajectory_scores',
]
