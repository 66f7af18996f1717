"""
Synthetic scenes with ground truth
"""

from rigidpath.synth.scenarios import Scenario, scenario_library
from rigidpath.synth.scene import (
    BACKGROUND_GROUP,
    BodySpec,
    CameraPath,
    GroundTruth,
    Intrinsics,
    SceneSpec,
    body_track,
    fundamental_from_poses,
    linear_camera_path,
    make_body,
    render_scene,
    skew,
    true_fundamental,
    two_view_pair,
    write_scene,
)

__all__ = [
    'Scenario', 'scenario_library', 'BACKGROUND_GROUP', 'BodySpec', 'CameraPath', 'GroundTruth',
    'Intrinsics', 'SceneSpec', 'body_track', 'fundamental_from_poses', 'linear_camera_path',
    'make_body', 'render_scene', 'skew', 'true_fundamental', 'two_view_pair', 'write_scene',
]
