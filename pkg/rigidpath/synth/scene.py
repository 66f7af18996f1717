"""
Synthetic pinhole scenes with a rigid background and independently moving bodies
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.spatial.transform import Rotation

from rigidpath.config import ensure_dir_exists
from rigidpath.geometry import FundamentalMatrix
from rigidpath.trajcore import Trajectory, VideoMeta, validate_trajectories, write_labels, write_trajectories

BACKGROUND_GROUP = "background"
NEAR_PLANE = 0.1
# occluder samples per side of a body's back face
OCCLUDER_GRID = 256
COLOR_SPREAD = 0.04

_PALETTE = (
    (0.85, 0.25, 0.20),
    (0.20, 0.45, 0.85),
    (0.95, 0.80, 0.20),
    (0.60, 0.30, 0.75),
)


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole camera with square pixels"""
    focal: float = 500.0
    width: int = 640
    height: int = 480
    cx: Optional[float] = None
    cy: Optional[float] = None

    def __post_init__(self):
        if self.focal <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError(f"Intrinsics must be positive: {self}")

    @property
    def K(self) -> np.ndarray:
        cx = self.width / 2.0 if self.cx is None else self.cx
        cy = self.height / 2.0 if self.cy is None else self.cy
        return np.array([[self.focal, 0.0, cx], [0.0, self.focal, cy], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraPath:
    """World-to-camera poses, X_cam = R X_world + t, one per frame"""
    rotations: np.ndarray
    translations: np.ndarray

    def __post_init__(self):
        _check_rotations(self.rotations, "camera")
        if self.translations.shape != (len(self.rotations), 3):
            raise ValueError("Camera translations must be (frames, 3)")

    @property
    def frames(self) -> int:
        return len(self.rotations)

    def centers(self) -> np.ndarray:
        return -np.einsum("fji,fj->fi", self.rotations, self.translations)


@dataclass
class BodySpec:
    """
    A rigid box of points carried by per-frame body-to-world poses

    `size` is (width, height, depth) in world units; the back face occludes
    anything behind it. `jitter` perturbs every point independently per
    frame, which makes the body non-rigid.
    """
    name: str
    size: Tuple[float, float, float]
    count: int
    translations: np.ndarray
    rotations: Optional[np.ndarray] = None
    color: Optional[Tuple[float, float, float]] = None
    turnover: Optional[float] = None
    max_track_length: Optional[int] = None
    jitter: float = 0.0
    occludes: bool = True

    def __post_init__(self):
        self.translations = np.asarray(self.translations, dtype=np.float64)
        if self.rotations is None:
            self.rotations = np.repeat(np.eye(3)[None], len(self.translations), axis=0)
        _check_rotations(self.rotations, f"body {self.name}")
        if self.name == BACKGROUND_GROUP:
            raise ValueError(f"Body name '{BACKGROUND_GROUP}' is reserved")
        if self.count < 0 or min(self.size) < 0:
            raise ValueError(f"Body {self.name} needs a non-negative count and size")


@dataclass
class SceneSpec:
    """Everything render_scene needs apart from the seed"""
    camera: CameraPath
    intrinsics: Intrinsics = field(default_factory=Intrinsics)
    background_count: int = 3000
    depth_range: Tuple[float, float] = (8.0, 30.0)
    bodies: List[BodySpec] = field(default_factory=list)
    noise_px: float = 0.0
    turnover: float = 0.006
    background_color: Tuple[float, float, float] = (0.35, 0.55, 0.35)
    occlusion_radius: float = 4.0
    depth_tolerance: float = 0.05

    def __post_init__(self):
        frames = self.camera.frames
        for body in self.bodies:
            if len(body.translations) != frames:
                raise ValueError(f"Body {body.name} has {len(body.translations)} poses for {frames} frames")
        names = [b.name for b in self.bodies]
        if len(set(names)) != len(names):
            raise ValueError(f"Body names must be unique: {names}")
        low, high = self.depth_range
        if not 0 < low <= high:
            raise ValueError(f"Invalid depth range {self.depth_range}")
        if self.noise_px < 0 or not 0 <= self.turnover < 1:
            raise ValueError("noise_px must be >= 0 and turnover in [0, 1)")

    @property
    def frames(self) -> int:
        return self.camera.frames

    def groups(self) -> Tuple[str, ...]:
        return (BACKGROUND_GROUP,) + tuple(b.name for b in self.bodies)

    def body(self, name: str) -> BodySpec:
        for body in self.bodies:
            if body.name == name:
                return body
        raise KeyError(f"Unknown group {name}")


def _check_rotations(rotations: np.ndarray, what: str):
    rotations = np.asarray(rotations)
    if rotations.ndim != 3 or rotations.shape[1:] != (3, 3):
        raise ValueError(f"{what} rotations must be (frames, 3, 3)")
    gram = rotations @ np.transpose(rotations, (0, 2, 1))
    if not np.allclose(gram, np.eye(3), atol=1e-9) or not np.allclose(np.linalg.det(rotations), 1.0, atol=1e-9):
        raise ValueError(f"{what} rotations are not proper rotations")


def linear_camera_path(frames: int, velocity=(0.05, 0.0, 0.0), rotation_rate=(0.0, 0.0, 0.0),
                       jitter: float = 0.0, seed: int = 0) -> CameraPath:
    """
    Camera moving with constant velocity and angular rate from the world origin

    Args:
        frames: Number of frames
        velocity: Center displacement per frame in world units
        rotation_rate: Rotation vector per frame (radians)
        jitter: Std of random per-frame center perturbations
        seed: Seed of the jitter

    Returns:
        CameraPath looking down +z at frame 0
    """
    steps = np.arange(frames, dtype=np.float64)[:, None]
    centers = steps * np.asarray(velocity, dtype=np.float64)
    if jitter > 0:
        centers = centers + np.random.default_rng(seed).normal(0.0, jitter, centers.shape)
    cam_to_world = Rotation.from_rotvec(steps * np.asarray(rotation_rate, dtype=np.float64)).as_matrix()
    rotations = np.transpose(cam_to_world, (0, 2, 1))
    translations = -np.einsum("fij,fj->fi", rotations, centers)
    return CameraPath(rotations, translations)


def triangle_wave(frames: int, amplitude: float, period: float) -> np.ndarray:
    phase = (np.arange(frames) / period) % 1.0
    return amplitude * (4.0 * np.abs(phase - 0.5) - 1.0)


def body_track(frames: int, start, velocity=(0.0, 0.0, 0.0), static_ranges: Sequence[Tuple[int, int]] = (),
               wave_amplitude: float = 0.0, wave_period: float = 20.0) -> np.ndarray:
    """
    Per-frame body translations: constant velocity plus a vertical triangle wave

    The body does not move between frames f and f + 1 when a <= f < b for a
    static range (a, b).
    """
    steps = np.repeat(np.asarray(velocity, dtype=np.float64)[None], max(frames - 1, 0), axis=0)
    if wave_amplitude:
        steps[:, 1] += np.diff(triangle_wave(frames, wave_amplitude, wave_period))
    for a, b in static_ranges:
        steps[max(a, 0):max(min(b, frames - 1), 0)] = 0.0
    track = np.zeros((frames, 3))
    track[0] = np.asarray(start, dtype=np.float64)
    if frames > 1:
        track[1:] = track[0] + np.cumsum(steps, axis=0)
    return track


def make_body(name: str, frames: int, size, count: int, start, velocity=(0.0, 0.0, 0.0),
              **kwargs) -> BodySpec:
    """BodySpec on a body_track; track options and BodySpec fields are both accepted"""
    track_keys = ("static_ranges", "wave_amplitude", "wave_period")
    track_args = {key: kwargs.pop(key) for key in track_keys if key in kwargs}
    return BodySpec(name, tuple(size), count, body_track(frames, start, velocity, **track_args), **kwargs)


def _project(K: np.ndarray, rotations: np.ndarray, translations: np.ndarray, points: np.ndarray):
    """
    Project per-frame world points

    Args:
        points: (frames, n, 3) world points

    Returns:
        tuple: (pixels (frames, n, 2), depths (frames, n))
    """
    cam = np.einsum("fij,fnj->fni", rotations, points) + translations[:, None, :]
    depth = cam[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = cam[..., :2] / depth[..., None]
    pixels = normalized * K[[0, 1], [0, 1]] + K[:2, 2]
    return pixels, depth


def _body_world(body: BodySpec, local: np.ndarray) -> np.ndarray:
    return np.einsum("fij,nj->fni", body.rotations, local) + body.translations[:, None, :]


def _box_points(rng: np.random.Generator, size, count: int) -> np.ndarray:
    return (rng.random((count, 3)) - 0.5) * np.asarray(size, dtype=np.float64)


def _back_face(size) -> np.ndarray:
    w, h, d = size
    xs = np.linspace(-w / 2, w / 2, OCCLUDER_GRID)
    ys = np.linspace(-h / 2, h / 2, OCCLUDER_GRID)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel(), np.full(gx.size, d / 2)], axis=1)


class _DepthBuffer:
    """Per-frame minimum occluder depth over cells of occlusion_radius pixels"""

    def __init__(self, spec: SceneSpec):
        self.cell = spec.occlusion_radius
        self.tolerance = spec.depth_tolerance
        width, height = spec.intrinsics.width, spec.intrinsics.height
        self.shape = (spec.frames, int(np.ceil(height / self.cell)) + 1, int(np.ceil(width / self.cell)) + 1)
        self.depth = np.full(self.shape, np.inf)

    def add(self, pixels: np.ndarray, depth: np.ndarray):
        frames = np.broadcast_to(np.arange(self.shape[0])[:, None], depth.shape)
        ix = np.floor(pixels[..., 0] / self.cell)
        iy = np.floor(pixels[..., 1] / self.cell)
        ok = ((depth > NEAR_PLANE) & (ix >= 0) & (iy >= 0)
              & (ix < self.shape[2]) & (iy < self.shape[1]))
        np.minimum.at(self.depth, (frames[ok], iy[ok].astype(int), ix[ok].astype(int)), depth[ok])

    def occluded(self, pixels: np.ndarray, depth: np.ndarray) -> np.ndarray:
        frames = np.broadcast_to(np.arange(self.shape[0])[:, None], depth.shape)
        ix = np.clip(np.floor(np.nan_to_num(pixels[..., 0]) / self.cell), 0, self.shape[2] - 1).astype(int)
        iy = np.clip(np.floor(np.nan_to_num(pixels[..., 1]) / self.cell), 0, self.shape[1] - 1).astype(int)
        return self.depth[frames, iy, ix] < depth * (1.0 - self.tolerance)


@dataclass
class GroundTruth:
    """True group per trajectory plus the poses needed for true fundamental matrices"""
    labels: Dict[int, str]
    groups: Tuple[str, ...]
    intrinsics: Intrinsics
    camera: CameraPath
    body_poses: Dict[str, Tuple[np.ndarray, np.ndarray]]
    flags: Tuple[str, ...] = ()

    @property
    def background_ids(self) -> frozenset:
        return frozenset(tid for tid, group in self.labels.items() if group == BACKGROUND_GROUP)

    def binary_labels(self) -> Dict[int, int]:
        return {tid: int(group == BACKGROUND_GROUP) for tid, group in self.labels.items()}

    def counts(self) -> Dict[str, int]:
        counts = {group: 0 for group in self.groups}
        for group in self.labels.values():
            counts[group] += 1
        return counts

    def pose(self, group: str, frame: int) -> Tuple[np.ndarray, np.ndarray]:
        """Map from the group's own coordinates to camera coordinates at `frame`"""
        R_c, t_c = self.camera.rotations[frame], self.camera.translations[frame]
        if group == BACKGROUND_GROUP:
            return R_c, t_c
        R_b, T_b = self.body_poses[group]
        return R_c @ R_b[frame], R_c @ T_b[frame] + t_c

    def fundamental(self, group: str, j: int, k: int) -> FundamentalMatrix:
        return fundamental_from_poses(self.intrinsics.K, self.pose(group, j), self.pose(group, k), (j, k))


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def fundamental_from_poses(K: np.ndarray, pose_j, pose_k, frame_pair=(0, 1)) -> FundamentalMatrix:
    """F = K^-T [t]x R K^-1 with R = R_k R_j^T and t = t_k - R t_j"""
    R_j, t_j = pose_j
    R_k, t_k = pose_k
    R = R_k @ R_j.T
    t = t_k - R @ t_j
    K_inv = np.linalg.inv(K)
    return FundamentalMatrix.from_matrix(frame_pair, K_inv.T @ skew(t) @ R @ K_inv)


def true_fundamental(spec: SceneSpec, group: str, j: int, k: int) -> FundamentalMatrix:
    """True matrix of a group for frames (j, k), computed from the scene poses"""
    R_c, t_c = spec.camera.rotations, spec.camera.translations

    def pose(frame):
        if group == BACKGROUND_GROUP:
            return R_c[frame], t_c[frame]
        body = spec.body(group)
        return R_c[frame] @ body.rotations[frame], R_c[frame] @ body.translations[frame] + t_c[frame]

    return fundamental_from_poses(spec.intrinsics.K, pose(j), pose(k), (j, k))


def _runs(visible: np.ndarray, cuts: np.ndarray, max_length: Optional[int]) -> List[Tuple[int, int]]:
    """Inclusive (first, last) frame runs of a visibility mask split at cuts"""
    runs = []
    start = None
    for frame, seen in enumerate(visible):
        if seen and start is not None and (cuts[frame] or (max_length and frame - start >= max_length)):
            runs.append((start, frame - 1))
            start = None
        if seen and start is None:
            start = frame
        elif not seen and start is not None:
            runs.append((start, frame - 1))
            start = None
    if start is not None:
        runs.append((start, len(visible) - 1))
    return runs


def _colors(rng: np.random.Generator, base, count: int) -> np.ndarray:
    return np.clip(np.asarray(base) + rng.normal(0.0, COLOR_SPREAD, (count, 3)), 0.0, 1.0)


def render_scene(spec: SceneSpec, seed: int = 0) -> Tuple[VideoMeta, List[Trajectory], GroundTruth]:
    """
    Track every visible scene point through the video

    A point's trajectory ends when it leaves the frame, falls behind an
    occluding body or is cut by turnover; runs shorter than two frames are
    dropped. Positions get Gaussian noise of noise_px and are clipped to the
    frame.

    Args:
        spec: Scene description
        seed: Fixes every random draw

    Returns:
        tuple: (VideoMeta, trajectories with sequential ids, GroundTruth)
    """
    rng = np.random.default_rng(seed)
    intr = spec.intrinsics
    K = intr.K
    frames = spec.frames
    cam_R, cam_t = spec.camera.rotations, spec.camera.translations
    meta = VideoMeta(intr.width, intr.height, frames)

    flags = []
    centers = spec.camera.centers()
    if np.allclose(centers, centers[0], atol=1e-9) and spec.turnover > 0:
        logger.warning("Camera does not translate but turnover is positive")
        flags.append("static-camera")

    # background points back-projected from a random frame, pixel and depth
    birth = rng.integers(0, frames, spec.background_count)
    pixel = rng.random((spec.background_count, 2)) * (intr.width, intr.height)
    depth = rng.uniform(*spec.depth_range, spec.background_count)
    rays = np.linalg.solve(K, np.column_stack([pixel, np.ones(spec.background_count)]).T).T
    cam_points = rays * depth[:, None]
    world = np.einsum("nji,nj->ni", cam_R[birth], cam_points - cam_t[birth])

    groups = [(BACKGROUND_GROUP, np.broadcast_to(world, (frames,) + world.shape),
               spec.turnover, None, spec.background_color)]
    zbuffer = _DepthBuffer(spec)
    for index, body in enumerate(spec.bodies):
        local = _box_points(rng, body.size, body.count)
        points = _body_world(body, local)
        if body.jitter > 0:
            points = points + rng.normal(0.0, body.jitter, points.shape)
        turnover = spec.turnover if body.turnover is None else body.turnover
        color = body.color or _PALETTE[index % len(_PALETTE)]
        groups.append((body.name, points, turnover, body.max_track_length, color))
        if body.occludes:
            face_pixels, face_depth = _project(K, cam_R, cam_t, _body_world(body, _back_face(body.size)))
            zbuffer.add(face_pixels, face_depth)

    trajs: List[Trajectory] = []
    labels: Dict[int, str] = {}
    for name, points, turnover, max_length, color in groups:
        pixels, depths = _project(K, cam_R, cam_t, np.asarray(points))
        visible = ((depths > NEAR_PLANE)
                   & (pixels[..., 0] >= 0) & (pixels[..., 0] <= intr.width)
                   & (pixels[..., 1] >= 0) & (pixels[..., 1] <= intr.height))
        visible &= ~zbuffer.occluded(pixels, depths)
        cuts = rng.random(visible.shape) < turnover
        noise = rng.normal(0.0, spec.noise_px, pixels.shape) if spec.noise_px > 0 else None
        colors = _colors(rng, color, pixels.shape[1])

        for point in range(pixels.shape[1]):
            for first, last in _runs(visible[:, point], cuts[:, point], max_length):
                if last - first + 1 < 2:
                    continue
                track = pixels[first:last + 1, point].copy()
                if noise is not None:
                    track += noise[first:last + 1, point]
                np.clip(track, 0.0, (intr.width, intr.height), out=track)
                tid = len(trajs)
                trajs.append(Trajectory(tid, first, track,
                                        np.repeat(colors[point][None], len(track), axis=0)))
                labels[tid] = name

    validate_trajectories(meta, trajs)
    truth = GroundTruth(
        labels=labels,
        groups=spec.groups(),
        intrinsics=intr,
        camera=spec.camera,
        body_poses={b.name: (b.rotations, b.translations) for b in spec.bodies},
        flags=tuple(flags),
    )
    logger.info(f"Rendered {len(trajs)} trajectories over {frames} frames: {truth.counts()}")
    return meta, trajs, truth


def two_view_pair(rng: np.random.Generator, count: int = 50, intrinsics: Intrinsics = None,
                  baseline: float = 0.5, depth_range=(4.0, 20.0)):
    """
    Noise-free correspondences between two random views of a random point cloud

    Returns:
        tuple: (points_j (n, 2), points_k (n, 2), true FundamentalMatrix)
    """
    intrinsics = intrinsics or Intrinsics()
    K = intrinsics.K
    pixel = rng.random((count, 2)) * (intrinsics.width, intrinsics.height)
    depth = rng.uniform(*depth_range, count)
    world = np.linalg.solve(K, np.column_stack([pixel, np.ones(count)]).T).T * depth[:, None]

    R_k = Rotation.from_rotvec(rng.normal(0.0, 0.05, 3)).as_matrix()
    direction = rng.normal(size=3)
    t_k = baseline * direction / np.linalg.norm(direction)
    cam_k = world @ R_k.T + t_k
    points_k = cam_k[:, :2] / cam_k[:, 2:3] * K[[0, 1], [0, 1]] + K[:2, 2]
    F = fundamental_from_poses(K, (np.eye(3), np.zeros(3)), (R_k, t_k))
    return pixel, points_k, F


def write_scene(out_dir: Union[str, Path], meta: VideoMeta, trajs: Sequence[Trajectory],
                truth: GroundTruth) -> Dict[str, Path]:
    """Write trajectories.txt, ground_truth.labels and groups.txt into out_dir"""
    out_dir = Path(ensure_dir_exists(out_dir))
    paths = {
        "trajectories": out_dir / "trajectories.txt",
        "labels": out_dir / "ground_truth.labels",
        "groups": out_dir / "groups.txt",
    }
    write_trajectories(paths["trajectories"], meta, trajs)
    write_labels(paths["labels"], truth.binary_labels())
    with open(paths["groups"], "w", encoding="utf-8") as f:
        for tid in sorted(truth.labels):
            f.write(f"{tid} {truth.labels[tid]}\n")
    logger.info(f"Wrote scene with {len(trajs)} trajectories to {out_dir}")
    return paths
