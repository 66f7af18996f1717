"""
Trajectory data model, visibility classification and sub-trajectory values
"""

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from rigidpath.errors import BoundsError, ConsistencyError

FrameWindow = Tuple[int, int]


class VisibilityIndicator(IntEnum):
    """How a trajectory relates to a frame window"""
    FULL = 1
    PARTIAL = 0
    INVISIBLE = -1


def _frozen_array(values, columns: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != columns:
        raise ValueError(f"{name} must have shape (n, {columns}), got {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A tracked feature: consecutive per-frame positions and optional colors"""
    id: int
    start_frame: int
    points: np.ndarray
    colors: Optional[np.ndarray] = None

    def __post_init__(self):
        points = _frozen_array(self.points, 2, "points")
        if len(points) == 0:
            raise ValueError(f"Trajectory {self.id} has no points")
        if not np.all(np.isfinite(points)):
            raise ValueError(f"Trajectory {self.id} has non-finite positions")
        if self.start_frame < 0:
            raise ValueError(f"Trajectory {self.id} starts at negative frame {self.start_frame}")
        object.__setattr__(self, "points", points)

        if self.colors is not None:
            colors = _frozen_array(self.colors, 3, "colors")
            if len(colors) != len(points):
                raise ValueError(
                    f"Trajectory {self.id} has {len(colors)} colors for {len(points)} points"
                )
            object.__setattr__(self, "colors", colors)

    @property
    def end_frame(self) -> int:
        return self.start_frame + len(self.points) - 1

    def __len__(self) -> int:
        return len(self.points)

    def visible_at(self, frame: int) -> bool:
        return self.start_frame <= frame <= self.end_frame

    def position(self, frame: int) -> np.ndarray:
        """Position at an absolute frame index"""
        if not self.visible_at(frame):
            raise BoundsError(f"Trajectory {self.id} is not visible at frame {frame}")
        return self.points[frame - self.start_frame]

    def same_content(self, other: "Trajectory") -> bool:
        """Logical equality, including exact float values"""
        if self.id != other.id or self.start_frame != other.start_frame:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.colors is None) != (other.colors is None):
            return False
        return self.colors is None or np.array_equal(self.colors, other.colors)


@dataclass(frozen=True)
class VideoMeta:
    """Frame geometry of the video the trajectories were tracked in"""
    frame_width: int
    frame_height: int
    frame_count: int

    def __post_init__(self):
        if self.frame_width <= 0 or self.frame_height <= 0 or self.frame_count <= 0:
            raise ValueError(f"Video dimensions must be positive: {self}")

    def check_window(self, window: FrameWindow):
        first, last = window
        if first > last:
            raise BoundsError(f"Empty frame window {window}")
        if first < 0 or last >= self.frame_count:
            raise BoundsError(f"Window {window} outside video [0, {self.frame_count})")


@dataclass(frozen=True)
class SubTrajectoryValue:
    """Credit a trajectory contributes to one clip it spans"""
    trajectory_id: int
    clip_index: int
    value: Fraction


def validate_trajectories(meta: VideoMeta, trajs: Sequence[Trajectory]):
    """
    Check trajectories against the video they belong to

    Raises:
        ValueError: on duplicate ids, frames past the video end or positions outside the frame
    """
    seen = set()
    for traj in trajs:
        if traj.id in seen:
            raise ValueError(f"Duplicate trajectory id {traj.id}")
        seen.add(traj.id)
        if traj.end_frame >= meta.frame_count:
            raise ValueError(
                f"Trajectory {traj.id} ends at frame {traj.end_frame}, video has {meta.frame_count}"
            )
        xs, ys = traj.points[:, 0], traj.points[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() > meta.frame_width or ys.max() > meta.frame_height:
            raise ValueError(f"Trajectory {traj.id} leaves the frame")


def classify_visibility(traj: Trajectory, window: FrameWindow,
                        meta: Optional[VideoMeta] = None) -> VisibilityIndicator:
    """
    Classify a trajectory against an inclusive frame window

    Args:
        traj: The trajectory
        window: (first, last) inclusive frame range
        meta: When given, the window is checked against the video bounds

    Returns:
        FULL if visible at every frame of the window, INVISIBLE if at none, PARTIAL otherwise
    """
    first, last = window
    if meta is not None:
        meta.check_window(window)
    elif first > last or first < 0:
        raise BoundsError(f"Invalid frame window {window}")

    if traj.start_frame <= first and traj.end_frame >= last:
        return VisibilityIndicator.FULL
    if traj.end_frame < first or traj.start_frame > last:
        return VisibilityIndicator.INVISIBLE
    return VisibilityIndicator.PARTIAL


def sub_trajectory_values(trajs: Sequence[Trajectory], clips: Sequence[Any]) -> List[SubTrajectoryValue]:
    """
    Split each trajectory's unit credit evenly over the clips it spans

    Args:
        trajs: All trajectories of the video
        clips: Objects with `index`, `first` and `last` attributes covering the video

    Returns:
        One SubTrajectoryValue per (trajectory, clip) pair where the trajectory is visible
    """
    if not trajs:
        return []
    starts = np.array([t.start_frame for t in trajs])
    ends = np.array([t.end_frame for t in trajs])

    spans: List[List[int]] = [[] for _ in trajs]
    for clip in clips:
        visible = np.nonzero((starts <= clip.last) & (ends >= clip.first))[0]
        for row in visible:
            spans[row].append(clip.index)

    values = []
    for traj, clip_indices in zip(trajs, spans):
        if not clip_indices:
            raise ConsistencyError(
                f"Trajectory {traj.id} (frames {traj.start_frame}-{traj.end_frame}) overlaps no clip"
            )
        share = Fraction(1, len(clip_indices))
        values.extend(SubTrajectoryValue(traj.id, ci, share) for ci in clip_indices)
    return values


class SubTrajectoryTable:
    """Lookup view over sub-trajectory values"""

    def __init__(self, values: Iterable[SubTrajectoryValue]):
        self._values: Dict[Tuple[int, int], Fraction] = {}
        self._by_clip: Dict[int, set] = {}
        self._by_traj: Dict[int, List[int]] = {}
        for item in values:
            self._values[(item.trajectory_id, item.clip_index)] = item.value
            self._by_clip.setdefault(item.clip_index, set()).add(item.trajectory_id)
            self._by_traj.setdefault(item.trajectory_id, []).append(item.clip_index)
        self._float = {key: float(v) for key, v in self._values.items()}

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key: Tuple[int, int]) -> bool:
        return key in self._values

    def exact(self, trajectory_id: int, clip_index: int) -> Fraction:
        return self._values.get((trajectory_id, clip_index), Fraction(0))

    def value(self, trajectory_id: int, clip_index: int) -> float:
        return self._float.get((trajectory_id, clip_index), 0.0)

    def clip_ids(self, clip_index: int) -> FrozenSet[int]:
        return frozenset(self._by_clip.get(clip_index, ()))

    def clips_of(self, trajectory_id: int) -> Tuple[int, ...]:
        return tuple(sorted(self._by_traj.get(trajectory_id, ())))

    def trajectory_ids(self) -> List[int]:
        return list(self._by_traj)

    def total(self, trajectory_id: int) -> Fraction:
        return sum((self._values[(trajectory_id, ci)] for ci in self._by_traj.get(trajectory_id, ())),
                   Fraction(0))


class TrackArray:
    """
    Dense NaN-padded position stack of a trajectory set

    positions has shape (n, frame_count, 2); colors, when every trajectory
    carries them, has shape (n, frame_count, 3).
    """

    def __init__(self, trajs: Sequence[Trajectory], frame_count: int):
        self.frame_count = frame_count
        self.ids = np.array([t.id for t in trajs], dtype=np.int64)
        self.starts = np.array([t.start_frame for t in trajs], dtype=np.int64)
        self.ends = np.array([t.end_frame for t in trajs], dtype=np.int64)
        self.row_of: Dict[int, int] = {int(tid): row for row, tid in enumerate(self.ids)}

        self.positions = np.full((len(trajs), frame_count, 2), np.nan)
        has_colors = bool(trajs) and all(t.colors is not None for t in trajs)
        self.colors = np.full((len(trajs), frame_count, 3), np.nan) if has_colors else None

        for row, traj in enumerate(trajs):
            if traj.end_frame >= frame_count:
                raise BoundsError(f"Trajectory {traj.id} ends past frame {frame_count - 1}")
            self.positions[row, traj.start_frame:traj.end_frame + 1] = traj.points
            if has_colors:
                self.colors[row, traj.start_frame:traj.end_frame + 1] = traj.colors

        logger.debug(f"Stacked {len(trajs)} trajectories over {frame_count} frames")

    def __len__(self) -> int:
        return len(self.ids)

    def rows(self, ids: Iterable[int]) -> np.ndarray:
        return np.array([self.row_of[int(tid)] for tid in ids], dtype=np.int64)

    def visible_rows(self, first: int, last: int) -> np.ndarray:
        """Rows of trajectories visible somewhere in [first, last]"""
        return np.nonzero((self.starts <= last) & (self.ends >= first))[0]

    def full_rows(self, first: int, last: int) -> np.ndarray:
        """Rows of trajectories visible at every frame of [first, last]"""
        return np.nonzero((self.starts <= first) & (self.ends >= last))[0]
