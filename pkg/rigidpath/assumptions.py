"""
Checks for inputs that break the method's premises
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from loguru import logger

from rigidpath.trajcore import Trajectory

FLAG_BRIDGED = "bridged-path"
FLAG_STATIC_CAMERA = "static-camera"
FLAG_SHORT_TRAJECTORIES = "short-trajectories"


@dataclass
class AssumptionParams:
    static_fraction: float = 0.1
    static_speed_px: float = 0.2
    static_min_points: int = 5
    short_fraction: float = 0.2
    short_max_points: int = 3

    def __post_init__(self):
        if not 0 < self.static_fraction <= 1 or not 0 < self.short_fraction <= 1:
            raise ValueError("Flag fractions must be in (0, 1]")
        if self.static_min_points < 2 or self.short_max_points < 1 or self.static_speed_px < 0:
            raise ValueError("Invalid assumption thresholds")


def static_fraction(trajs: Sequence[Trajectory], params: AssumptionParams) -> float:
    """Share of long-enough trajectories that stray less than static_speed_px per frame from their first point"""
    long_enough = [t for t in trajs if len(t) >= params.static_min_points]
    if not long_enough:
        return 0.0
    speeds = np.array([np.linalg.norm(t.points - t.points[0], axis=1).max() / (len(t) - 1)
                       for t in long_enough])
    return float(np.mean(speeds < params.static_speed_px))


def short_fraction(trajs: Sequence[Trajectory], params: AssumptionParams) -> float:
    if not trajs:
        return 0.0
    return float(np.mean([len(t) <= params.short_max_points for t in trajs]))


def assumption_flags(trajs: Sequence[Trajectory], params: AssumptionParams, bridged: bool = False) -> List[str]:
    """Names of violated premises, in a fixed order"""
    flags = []
    if bridged:
        flags.append(FLAG_BRIDGED)
    if static_fraction(trajs, params) >= params.static_fraction:
        flags.append(FLAG_STATIC_CAMERA)
    if short_fraction(trajs, params) >= params.short_fraction:
        flags.append(FLAG_SHORT_TRAJECTORIES)
    for flag in flags:
        logger.warning(f"Assumption flag raised: {flag}")
    return flags
