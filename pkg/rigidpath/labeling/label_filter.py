"""
Local label filtering over spatial neighbours with similar color
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from rigidpath.labeling.labels import LabelStage, LabelState
from rigidpath.trajcore import TrackArray, VideoMeta

# neighbour pairs evaluated per vectorized step
PAIR_BLOCK = 20_000


@dataclass
class FilterParams:
    """Distances are fractions of the frame width"""
    neighbor_ratio: float = 0.05
    sigma_d_ratio: float = 0.02
    sigma_c: float = 0.18
    threshold: float = 0.5
    enabled: bool = True

    def __post_init__(self):
        for name in ("neighbor_ratio", "sigma_d_ratio", "sigma_c", "threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    def neighbor_dist(self, meta: VideoMeta) -> float:
        return self.neighbor_ratio * meta.frame_width

    def sigma_d(self, meta: VideoMeta) -> float:
        return self.sigma_d_ratio * meta.frame_width


def neighbor_pairs(tracks: TrackArray, radius: float) -> np.ndarray:
    """
    Row pairs (a, b), a < b, closer than `radius` in at least one shared frame

    Returns:
        (K, 2) int array sorted lexicographically
    """
    n = len(tracks)
    found = []
    for frame in range(tracks.frame_count):
        points = tracks.positions[:, frame]
        rows = np.nonzero(np.isfinite(points[:, 0]))[0]
        if len(rows) < 2:
            continue
        local = cKDTree(points[rows]).query_pairs(radius, output_type="ndarray")
        if not len(local):
            continue
        a, b = rows[local[:, 0]], rows[local[:, 1]]
        close = np.linalg.norm(points[a] - points[b], axis=1) < radius
        lo, hi = np.minimum(a, b)[close], np.maximum(a, b)[close]
        found.append(lo.astype(np.int64) * n + hi)
    if not found:
        return np.zeros((0, 2), dtype=np.int64)
    keys = np.unique(np.concatenate(found))
    return np.stack([keys // n, keys % n], axis=1)


def pair_weights(tracks: TrackArray, pairs: np.ndarray, sigma_d: float, sigma_c: float) -> np.ndarray:
    """
    w = exp(-d_s^2 / 2 sigma_d^2) * exp(-d_c^2 / 2 sigma_c^2)

    d_s is the largest distance over shared frames and d_c the mean RGB
    distance over shared frames; without colors the color factor is 1.
    """
    weights = np.zeros(len(pairs))
    for start in range(0, len(pairs), PAIR_BLOCK):
        block = pairs[start:start + PAIR_BLOCK]
        a, b = block[:, 0], block[:, 1]
        dist = np.linalg.norm(tracks.positions[a] - tracks.positions[b], axis=2)
        shared = np.isfinite(dist)
        d_s = np.where(shared, dist, -np.inf).max(axis=1)
        w = np.exp(-(d_s ** 2) / (2 * sigma_d ** 2))
        if tracks.colors is not None:
            color = np.linalg.norm(tracks.colors[a] - tracks.colors[b], axis=2)
            d_c = np.where(shared, color, 0.0).sum(axis=1) / np.maximum(shared.sum(axis=1), 1)
            w = w * np.exp(-(d_c ** 2) / (2 * sigma_c ** 2))
        weights[start:start + len(block)] = w
    return weights


def filter_labels(state: LabelState, tracks: TrackArray, meta: VideoMeta,
                  params: FilterParams = None) -> LabelState:
    """
    Replace each label by the weighted majority of its neighbours

    L* = sum_j w_ij L_j / sum_j w_ij over neighbours j; background iff
    L* > threshold. All updates read the input labels. Trajectories without
    neighbours keep their label.

    Args:
        state: Input labels, normally the global stage
        tracks: Dense positions and optional colors
        meta: Frame width sets the distance scales
        params: Filter constants

    Returns:
        LabelState of stage filtered
    """
    params = params or FilterParams()
    current = np.array([state.labels[int(tid)] for tid in tracks.ids], dtype=np.float64)
    if not params.enabled:
        return LabelState(LabelStage.FILTERED, dict(state.labels))

    pairs = neighbor_pairs(tracks, params.neighbor_dist(meta))
    weights = pair_weights(tracks, pairs, params.sigma_d(meta), params.sigma_c)

    n = len(tracks)
    a, b = pairs[:, 0], pairs[:, 1]
    numerator = (np.bincount(a, weights * current[b], minlength=n)
                 + np.bincount(b, weights * current[a], minlength=n))
    denominator = np.bincount(a, weights, minlength=n) + np.bincount(b, weights, minlength=n)

    filtered = current.copy()
    has_weight = denominator > 0
    filtered[has_weight] = (numerator[has_weight] / denominator[has_weight] > params.threshold)

    labels = {int(tid): int(value) for tid, value in zip(tracks.ids, filtered)}
    flipped = int((filtered != current).sum())
    logger.info(f"Label filter: {len(pairs)} neighbour pairs, {flipped} labels changed")
    return LabelState(LabelStage.FILTERED, labels)
