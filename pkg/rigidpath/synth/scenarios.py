"""
Named synthetic scenarios

Turnover, baselines and occluder sizes are set so that a visible trajectory
ends with probability of roughly 0.004 to 0.007 per frame. Under the default
clip parameters that yields 5 to 15 clips over 100 frames. `density` scales
every point count and leaves those rates unchanged.
"""

from dataclasses import dataclass
from typing import Callable, Dict

from rigidpath.synth.scene import Intrinsics, SceneSpec, linear_camera_path, make_body

FRAMES = 100


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    build: Callable[..., SceneSpec]
    expected_fail: bool = False


def _scaled(count: int, density: float) -> int:
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    return max(1, int(round(count * density)))


def large_foreground(frames: int = FRAMES, density: float = 1.0) -> SceneSpec:
    """
    A slab over the right 57% of the frame rides along with the camera

    It is taller than the view and sinks slowly, so it covers the full frame
    height throughout. Background survives only in the left strip, where it
    appears from behind the slab and leaves at the frame edge.
    """
    speed = 0.03
    slab = make_body("slab", frames, size=(3.4, 4.8, 0.2), count=_scaled(1000, density),
                     start=(1.323, 0.3, 4.0), velocity=(speed, -0.006, 0.0), turnover=0.001)
    return SceneSpec(
        camera=linear_camera_path(frames, velocity=(speed, 0.0, 0.0)),
        background_count=_scaled(6000, density),
        depth_range=(8.0, 30.0),
        bodies=[slab],
        noise_px=0.3,
        turnover=0.001,
    )


def intermittent(frames: int = FRAMES, density: float = 1.0) -> SceneSpec:
    """A body that follows the camera except for a pause in the middle third"""
    speed = 0.05
    pause = (frames // 3, 2 * frames // 3)
    walker = make_body("walker", frames, size=(1.6, 1.6, 0.4), count=_scaled(500, density),
                       start=(-0.6, 0.0, 5.0), velocity=(speed, 0.0, 0.0), wave_amplitude=0.1,
                       wave_period=40.0, static_ranges=[pause], turnover=0.003)
    return SceneSpec(
        camera=linear_camera_path(frames, velocity=(speed, 0.0, 0.0)),
        background_count=_scaled(3000, density),
        depth_range=(8.0, 30.0),
        bodies=[walker],
        noise_px=0.2,
        turnover=0.003,
    )


def deep_background(frames: int = FRAMES, density: float = 1.0) -> SceneSpec:
    """Background depth spans a factor of twenty; the farthest points still move 0.5 px per frame"""
    speed = 0.1
    drone = make_body("drone", frames, size=(0.8, 0.5, 0.3), count=_scaled(200, density),
                      start=(0.0, -0.6, 4.0), velocity=(speed, 0.0, 0.0), wave_amplitude=0.1,
                      wave_period=30.0, turnover=0.003)
    return SceneSpec(
        camera=linear_camera_path(frames, velocity=(speed, 0.0, 0.0)),
        background_count=_scaled(3500, density),
        depth_range=(5.0, 100.0),
        bodies=[drone],
        noise_px=0.2,
        turnover=0.003,
    )


def near_static_camera(frames: int = FRAMES, density: float = 1.0) -> SceneSpec:
    """The camera barely moves while a train fills most of the view"""
    # long enough to span the view for the whole run
    train = make_body("train", frames, size=(14.0, 3.6, 1.0), count=_scaled(2700, density),
                      start=(-2.0, 0.0, 6.0), velocity=(0.04, 0.0, 0.0), turnover=0.001)
    return SceneSpec(
        camera=linear_camera_path(frames, velocity=(0.0, 0.0, 0.0), jitter=0.0005, seed=7),
        background_count=_scaled(2500, density),
        depth_range=(8.0, 30.0),
        bodies=[train],
        noise_px=0.2,
        turnover=0.002,
    )


def short_lifetime_nonrigid(frames: int = FRAMES, density: float = 1.0) -> SceneSpec:
    """Rippling water whose tracks live for three frames at most"""
    speed = 0.02
    water = make_body("water", frames, size=(8.0, 0.1, 2.0), count=_scaled(45, density),
                      start=(1.0, 1.2, 6.0), velocity=(0.0, 0.0, 0.0), max_track_length=3,
                      jitter=0.005, turnover=0.0, occludes=False)
    return SceneSpec(
        camera=linear_camera_path(frames, velocity=(speed, 0.0, 0.0)),
        intrinsics=Intrinsics(),
        background_count=_scaled(3000, density),
        depth_range=(8.0, 30.0),
        bodies=[water],
        noise_px=0.2,
        turnover=0.002,
    )


def scenario_library() -> Dict[str, Scenario]:
    """Every named scenario, keyed by name"""
    scenarios = [
        Scenario("large-foreground", "foreground slab larger than the visible background",
                 large_foreground),
        Scenario("intermittent", "foreground body static during the middle third", intermittent),
        Scenario("deep-background", "background depth range [5, 100]", deep_background),
        Scenario("near-static-camera", "camera hardly translates past a close-up train",
                 near_static_camera, expected_fail=True),
        Scenario("short-lifetime-nonrigid", "non-rigid region with very short tracks",
                 short_lifetime_nonrigid, expected_fail=True),
    ]
    return {s.name: s for s in scenarios}
