"""
Overlapping variable-length clip generation by the full-length trajectory ratio
"""

from dataclasses import dataclass, field
from typing import FrozenSet, List, Sequence

import numpy as np
from loguru import logger

from rigidpath.errors import BoundsError
from rigidpath.trajcore import Trajectory, VideoMeta


@dataclass
class ClipParams:
    """Parameters of clip expansion"""
    full_ratio: float = 0.8
    min_clip_len: int = 5
    max_clip_len: int = 60

    def __post_init__(self):
        if not 0 < self.full_ratio <= 1:
            raise ValueError(f"full_ratio must be in (0, 1], got {self.full_ratio}")
        if self.min_clip_len < 2 or self.max_clip_len < self.min_clip_len:
            raise ValueError(f"Need 2 <= min_clip_len <= max_clip_len, got "
                             f"{self.min_clip_len}, {self.max_clip_len}")


@dataclass(frozen=True)
class Clip:
    """A frame window and the trajectories visible in it"""
    index: int
    first: int
    last: int
    full_ids: FrozenSet[int] = field(default_factory=frozenset)
    partial_ids: FrozenSet[int] = field(default_factory=frozenset)
    forced: bool = False

    @property
    def window(self):
        return (self.first, self.last)

    @property
    def length(self) -> int:
        return self.last - self.first + 1

    @property
    def midpoint(self) -> int:
        return (self.first + self.last) // 2

    @property
    def visible_ids(self) -> FrozenSet[int]:
        return self.full_ids | self.partial_ids

    @property
    def full_ratio(self) -> float:
        visible = len(self.full_ids) + len(self.partial_ids)
        return len(self.full_ids) / visible if visible else 0.0


def _ratio(starts: np.ndarray, ends: np.ndarray, first: int, last: int) -> float:
    visible = np.count_nonzero((starts <= last) & (ends >= first))
    if visible == 0:
        return 0.0
    full = np.count_nonzero((starts <= first) & (ends >= last))
    return full / visible


def generate_clips(trajs: Sequence[Trajectory], meta: VideoMeta, params: ClipParams = None) -> List[Clip]:
    """
    Partition the video into overlapping clips

    Each clip grows frame by frame from its start while the full-length
    ratio holds, then is clamped to [min_clip_len, max_clip_len] and the
    video end. The next clip starts at the middle frame of the previous one.

    Args:
        trajs: All trajectories
        meta: Video geometry
        params: Expansion parameters

    Returns:
        Clips covering [0, frame_count - 1]
    """
    params = params or ClipParams()
    last_frame = meta.frame_count - 1
    if meta.frame_count < 2:
        raise BoundsError(f"Video needs at least 2 frames, has {meta.frame_count}")
    if not trajs:
        raise ValueError("Clip generation needs at least one trajectory")

    ids = np.array([t.id for t in trajs])
    starts = np.array([t.start_frame for t in trajs])
    ends = np.array([t.end_frame for t in trajs])

    clips: List[Clip] = []
    first = 0
    while True:
        # maximal prefix satisfying the ratio rule
        last = first + 1
        closed_by_ratio = False
        while last < last_frame and last - first + 1 < params.max_clip_len:
            if _ratio(starts, ends, first, last + 1) >= params.full_ratio:
                last += 1
            else:
                closed_by_ratio = True
                break

        # forced: the window end was set by a bound, not by the ratio rule
        satisfied = _ratio(starts, ends, first, last) >= params.full_ratio
        forced = not (closed_by_ratio and satisfied)
        if last - first + 1 < params.min_clip_len:
            last = first + params.min_clip_len - 1
            forced = True
        if last > last_frame:
            last = last_frame
            forced = True

        full = (starts <= first) & (ends >= last)
        visible = (starts <= last) & (ends >= first)
        clip = Clip(
            index=len(clips),
            first=first,
            last=last,
            full_ids=frozenset(ids[full].tolist()),
            partial_ids=frozenset(ids[visible & ~full].tolist()),
            forced=forced,
        )
        clips.append(clip)
        logger.debug(f"Clip {clip.index}: frames {first}-{last}, ratio {clip.full_ratio:.3f}"
                     f"{' (forced)' if forced else ''}")

        if last == last_frame:
            break
        next_first = clip.midpoint
        if next_first <= first:
            next_first = first + 1
        first = next_first

    logger.info(f"Generated {len(clips)} clips over {meta.frame_count} frames "
                f"({sum(c.forced for c in clips)} force-closed)")
    return clips


def format_clip_dump(clips: Sequence[Clip]) -> str:
    """Render clips as `index first last forced` lines"""
    return "".join(f"{c.index} {c.first} {c.last} {int(c.forced)}\n" for c in clips)
