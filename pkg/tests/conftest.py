"""
Shared fixtures: small synthetic scenes and trajectory builders
"""

import numpy as np
import pytest

from rigidpath.clips import ClipParams, generate_clips
from rigidpath.synth import SceneSpec, linear_camera_path, make_body, render_scene, scenario_library
from rigidpath.trajcore import SubTrajectoryTable, TrackArray, Trajectory, VideoMeta, sub_trajectory_values


def line_trajectory(tid, start, length, origin=(10.0, 10.0), step=(1.0, 0.0), colors=None):
    """Trajectory moving with a constant pixel step"""
    points = np.asarray(origin) + np.arange(length)[:, None] * np.asarray(step)
    if colors is not None:
        colors = np.repeat(np.asarray(colors, dtype=float)[None], length, axis=0)
    return Trajectory(tid, start, points, colors)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_meta():
    return VideoMeta(100, 80, 20)


@pytest.fixture(scope="session")
def background_scene():
    """Translating camera, rigid background only, no noise, no turnover"""
    spec = SceneSpec(
        camera=linear_camera_path(24, velocity=(0.08, 0.0, 0.0)),
        background_count=500,
        depth_range=(6.0, 20.0),
        turnover=0.0,
        noise_px=0.0,
    )
    meta, trajs, truth = render_scene(spec, seed=3)
    return spec, meta, trajs, truth


@pytest.fixture(scope="session")
def two_body_scene():
    """Background plus one box bobbing up and down in front of the camera"""
    frames = 30
    box = make_body("box", frames, size=(2.4, 2.0, 0.6), count=250, start=(0.0, 0.0, 5.0),
                    velocity=(0.06, 0.0, 0.0), wave_amplitude=0.25, wave_period=12.0, turnover=0.0)
    spec = SceneSpec(
        camera=linear_camera_path(frames, velocity=(0.06, 0.0, 0.0)),
        background_count=700,
        depth_range=(8.0, 25.0),
        bodies=[box],
        turnover=0.0,
        noise_px=0.0,
    )
    meta, trajs, truth = render_scene(spec, seed=5)
    return spec, meta, trajs, truth


@pytest.fixture(scope="session")
def background_prepared(background_scene):
    """Clips, sub-trajectory values and the dense stack of the background scene"""
    _, meta, trajs, _ = background_scene
    clips = generate_clips(trajs, meta, ClipParams())
    subvalues = SubTrajectoryTable(sub_trajectory_values(trajs, clips))
    return clips, subvalues, TrackArray(trajs, meta.frame_count)


def render_at_size(name, target, seed=0):
    """Render a named scenario with its density tuned to about `target` trajectories"""
    build = scenario_library()[name].build
    density = 1.0
    for _ in range(6):
        meta, trajs, truth = render_scene(build(density=density), seed=seed)
        if target <= len(trajs) <= 1.2 * target:
            break
        density *= 1.05 * target / len(trajs)
    return meta, trajs, truth
