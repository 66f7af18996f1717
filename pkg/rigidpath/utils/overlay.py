"""
Per-frame images of labeled feature points
"""

from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger
from PIL import Image, ImageDraw

from rigidpath.config import ensure_dir_exists
from rigidpath.errors import BoundsError
from rigidpath.trajcore import Trajectory, VideoMeta

BACKGROUND_COLOR = (255, 0, 0)
FOREGROUND_COLOR = (0, 255, 0)
MARKER_RADIUS = 2
FORMATS = {"ppm": "PPM", "png": "PNG"}


def render_frame(frame: int, labels: Mapping[int, int], trajs: Sequence[Trajectory],
                 meta: VideoMeta) -> Tuple[Image.Image, int]:
    """Black frame with a red marker per background point and a green one per other point"""
    if not 0 <= frame < meta.frame_count:
        raise BoundsError(f"Frame {frame} outside video [0, {meta.frame_count})")
    image = Image.new("RGB", (meta.frame_width, meta.frame_height))
    draw = ImageDraw.Draw(image)
    markers = 0
    for traj in trajs:
        if not traj.visible_at(frame):
            continue
        x, y = traj.position(frame)
        color = BACKGROUND_COLOR if labels.get(traj.id, 0) == 1 else FOREGROUND_COLOR
        draw.ellipse([x - MARKER_RADIUS, y - MARKER_RADIUS, x + MARKER_RADIUS, y + MARKER_RADIUS], fill=color)
        markers += 1
    return image, markers


def export_overlay(labels: Mapping[int, int], trajs: Sequence[Trajectory], meta: VideoMeta,
                   path: Union[str, Path], frames: Optional[Iterable[int]] = None,
                   fmt: str = "ppm") -> Dict[int, int]:
    """
    Write one image per frame with labeled feature points

    Args:
        labels: Trajectory id -> 1 for background
        trajs: Trajectories to draw
        meta: Video geometry
        path: Output directory
        frames: Frames to export, all by default
        fmt: "ppm" or "png"

    Returns:
        Mapping frame -> number of markers drawn

    Raises:
        BoundsError: a requested frame is outside the video
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unsupported overlay format '{fmt}', use one of {sorted(FORMATS)}")
    frames = list(range(meta.frame_count) if frames is None else frames)
    for frame in frames:
        if not 0 <= frame < meta.frame_count:
            raise BoundsError(f"Frame {frame} outside video [0, {meta.frame_count})")

    out_dir = Path(ensure_dir_exists(path))
    counts = {}
    for frame in frames:
        image, counts[frame] = render_frame(frame, labels, trajs, meta)
        image.save(out_dir / f"frame_{frame:05d}.{fmt}", format=FORMATS[fmt])
    logger.info(f"Wrote {len(frames)} overlay images to {out_dir}")
    return counts
