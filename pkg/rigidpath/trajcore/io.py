"""
Trajectory and label file reading/writing
"""

import os
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np
from loguru import logger

from rigidpath.errors import TrajectoryParseError
from rigidpath.trajcore.trajectory import Trajectory, VideoMeta

MAGIC = "TRAJ1"
COLOR_TOKEN = "RGB"

PathLike = Union[str, os.PathLike]


def _format_float(value: float) -> str:
    # repr gives the shortest string that parses back to the same double
    return repr(float(value))


def _parse_int(token: str, what: str, line_number: int, path: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise TrajectoryParseError(f"{what} must be an integer, got {token!r}", line_number, path)


def _parse_header(line: str, path: str) -> Tuple[VideoMeta, bool]:
    tokens = line.split()
    if not tokens or tokens[0] != MAGIC:
        raise TrajectoryParseError(f"expected header starting with {MAGIC}", 1, path)
    has_colors = len(tokens) == 5 and tokens[4] == COLOR_TOKEN
    if len(tokens) != 4 and not has_colors:
        raise TrajectoryParseError(
            f"header must be '{MAGIC} <width> <height> <frames> [{COLOR_TOKEN}]'", 1, path
        )
    width, height, frames = (_parse_int(tok, name, 1, path)
                             for tok, name in zip(tokens[1:4], ("frame width", "frame height", "frame count")))
    try:
        meta = VideoMeta(width, height, frames)
    except ValueError as e:
        raise TrajectoryParseError(str(e), 1, path)
    return meta, has_colors


def _parse_trajectory(line: str, line_number: int, meta: VideoMeta, has_colors: bool,
                      path: str) -> Trajectory:
    tokens = line.split()
    if len(tokens) < 3:
        raise TrajectoryParseError("trajectory line needs '<id> <start_frame> <n> ...'", line_number, path)
    traj_id = _parse_int(tokens[0], "trajectory id", line_number, path)
    start = _parse_int(tokens[1], "start frame", line_number, path)
    count = _parse_int(tokens[2], "point count", line_number, path)

    if count < 1:
        raise TrajectoryParseError(f"trajectory {traj_id} declares {count} points", line_number, path)
    if start < 0:
        raise TrajectoryParseError(f"trajectory {traj_id} starts at negative frame {start}", line_number, path)
    if start + count - 1 >= meta.frame_count:
        raise TrajectoryParseError(
            f"trajectory {traj_id} runs to frame {start + count - 1}, video has {meta.frame_count} frames",
            line_number, path
        )

    stride = 5 if has_colors else 2
    values = tokens[3:]
    if len(values) != count * stride:
        raise TrajectoryParseError(
            f"trajectory {traj_id} declares {count} points but carries {len(values) / stride:g}",
            line_number, path
        )
    try:
        numbers = np.array([float(tok) for tok in values], dtype=np.float64).reshape(count, stride)
    except ValueError:
        raise TrajectoryParseError(f"trajectory {traj_id} has a non-numeric value", line_number, path)
    if not np.all(np.isfinite(numbers)):
        raise TrajectoryParseError(f"trajectory {traj_id} has a non-finite value", line_number, path)

    points = numbers[:, :2]
    if (points[:, 0].min() < 0 or points[:, 1].min() < 0
            or points[:, 0].max() > meta.frame_width or points[:, 1].max() > meta.frame_height):
        raise TrajectoryParseError(f"trajectory {traj_id} has a position outside the frame", line_number, path)

    colors = None
    if has_colors:
        colors = numbers[:, 2:]
        if colors.min() < 0 or colors.max() > 1:
            raise TrajectoryParseError(f"trajectory {traj_id} has a color outside [0, 1]", line_number, path)

    return Trajectory(traj_id, start, points, colors)


def _read_lines(path: str) -> List[str]:
    with open(path, "rb") as f:
        data = f.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = data.count(b"\n", 0, e.start) + 1
        raise TrajectoryParseError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", line_number, path)
    return text.splitlines()


def read_trajectories(path: PathLike) -> Tuple[VideoMeta, List[Trajectory]]:
    """
    Read a trajectory file

    Args:
        path: File in the TRAJ1 format

    Returns:
        tuple: (VideoMeta, list of Trajectory) in file order

    Raises:
        TrajectoryParseError: naming the offending line
    """
    path = str(path)
    lines = _read_lines(path)

    if not lines or not lines[0].strip():
        raise TrajectoryParseError("missing header", 1, path)
    meta, has_colors = _parse_header(lines[0], path)

    trajs: List[Trajectory] = []
    seen = set()
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        traj = _parse_trajectory(line, line_number, meta, has_colors, path)
        if traj.id in seen:
            raise TrajectoryParseError(f"duplicate trajectory id {traj.id}", line_number, path)
        seen.add(traj.id)
        trajs.append(traj)

    if not trajs:
        raise TrajectoryParseError("file contains no trajectories", len(lines) + 1, path)

    logger.info(f"Read {len(trajs)} trajectories from {path} "
                f"({meta.frame_width}x{meta.frame_height}, {meta.frame_count} frames)")
    return meta, trajs


def write_trajectories(path: PathLike, meta: VideoMeta, trajs: Iterable[Trajectory]):
    """
    Write trajectories in the TRAJ1 format

    Raises:
        ValueError: some but not all trajectories carry colors
    """
    trajs = list(trajs)
    colored = sum(t.colors is not None for t in trajs)
    if 0 < colored < len(trajs):
        raise ValueError(f"{colored}/{len(trajs)} trajectories carry colors; all or none must")
    has_colors = bool(trajs) and colored == len(trajs)
    header = f"{MAGIC} {meta.frame_width} {meta.frame_height} {meta.frame_count}"
    if has_colors:
        header += f" {COLOR_TOKEN}"

    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for traj in trajs:
            fields = [str(traj.id), str(traj.start_frame), str(len(traj))]
            for i, (x, y) in enumerate(traj.points):
                fields.append(_format_float(x))
                fields.append(_format_float(y))
                if has_colors:
                    fields.extend(_format_float(c) for c in traj.colors[i])
            f.write(" ".join(fields) + "\n")
    logger.debug(f"Wrote {len(trajs)} trajectories to {path}")


def write_labels(path: PathLike, labels: Mapping[int, Union[bool, int, float]]):
    """Write `<id> <0|1>` lines sorted by id, 1 = background"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for traj_id in sorted(labels):
            f.write(f"{traj_id} {1 if labels[traj_id] else 0}\n")
    logger.debug(f"Wrote {len(labels)} labels to {path}")


def read_labels(path: PathLike) -> Dict[int, int]:
    """Read a label file into {id: 0|1}"""
    path = str(path)
    labels: Dict[int, int] = {}
    for line_number, line in enumerate(_read_lines(path), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2 or tokens[1] not in ("0", "1"):
            raise TrajectoryParseError("label line must be '<id> <0|1>'", line_number, path)
        traj_id = _parse_int(tokens[0], "trajectory id", line_number, path)
        if traj_id in labels:
            raise TrajectoryParseError(f"duplicate label for trajectory {traj_id}", line_number, path)
        labels[traj_id] = int(tokens[1])
    return labels
