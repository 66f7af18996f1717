"""
Single-RANSAC-per-clip labeling, the majority-motion baseline
"""

from collections import defaultdict
from typing import Dict, Sequence

from loguru import logger

from rigidpath.candidates.proposer import global_fallback
from rigidpath.candidates.ransac import ClipContext, RansacParams
from rigidpath.clips import Clip
from rigidpath.geometry import GeometryParams
from rigidpath.trajcore import TrackArray


def global_ransac_baseline(clips: Sequence[Clip], tracks: TrackArray, geometry: GeometryParams,
                           params: RansacParams) -> Dict[int, int]:
    """
    Label trajectories by one clip-wide consensus motion per clip

    A trajectory is background when it is a member of the clip-wide motion
    in more than half of the clips it is visible in.

    Returns:
        Mapping trajectory id -> 1 (background) or 0
    """
    votes: Dict[int, int] = defaultdict(int)
    seen: Dict[int, int] = defaultdict(int)
    for clip in clips:
        context = ClipContext(clip, tracks, geometry)
        motion = global_fallback(context, params)
        for tid in tracks.ids[context.visible_rows]:
            seen[int(tid)] += 1
        for tid in motion.member_ids:
            votes[tid] += 1

    labels = {int(tid): int(votes[int(tid)] * 2 > seen[int(tid)]) for tid in tracks.ids}
    logger.info(f"Baseline labeled {sum(labels.values())}/{len(labels)} trajectories as background")
    return labels
