"""
Trajectory data model and file formats
"""

from rigidpath.trajcore.trajectory import (
    FrameWindow,
    SubTrajectoryTable,
    SubTrajectoryValue,
    TrackArray,
    Trajectory,
    VideoMeta,
    VisibilityIndicator,
    classify_visibility,
    sub_trajectory_values,
    validate_trajectories,
)
from rigidpath.trajcore.io import read_labels, read_trajectories, write_labels, write_trajectories

__all__ = [
    'FrameWindow', 'SubTrajectoryTable', 'SubTrajectoryValue', 'TrackArray', 'Trajectory',
    'VideoMeta', 'VisibilityIndicator', 'classify_visibility', 'sub_trajectory_values',
    'validate_trajectories', 'read_labels', 'read_trajectories', 'write_labels', 'write_trajectories',
]
