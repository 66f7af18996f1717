"""
Fundamental matrix estimation and epipolar geometric error
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from rigidpath.errors import DegenerateConfigurationError

SQRT2 = np.sqrt(2.0)
# tolerance for "point lies on line" after isotropic normalization
COLLINEAR_TOL = 1e-8
# points sampled per view when looking for a dominant line
COLLINEAR_SPOTS = 16


@dataclass
class GeometryParams:
    """Motion model and membership test parameters"""
    r: int = 5
    epsilon_f: float = 1.5
    theta_member: float = 0.9
    min_tested_pairs: int = 3
    max_condition: float = 1e10
    max_collinear_fraction: float = 0.75

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.epsilon_f <= 0:
            raise ValueError(f"epsilon_f must be positive, got {self.epsilon_f}")
        if not 0 < self.theta_member <= 1:
            raise ValueError(f"theta_member must be in (0, 1], got {self.theta_member}")
        if self.min_tested_pairs < 1:
            raise ValueError(f"min_tested_pairs must be >= 1, got {self.min_tested_pairs}")


@dataclass(frozen=True, eq=False)
class FundamentalMatrix:
    """Rank-2, unit Frobenius norm fundamental matrix for an ordered frame pair"""
    frame_pair: Tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.shape != (3, 3):
            raise ValueError(f"Fundamental matrix must be 3x3, got {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "frame_pair", (int(self.frame_pair[0]), int(self.frame_pair[1])))

    @classmethod
    def from_matrix(cls, frame_pair: Tuple[int, int], matrix: np.ndarray) -> "FundamentalMatrix":
        """Project an arbitrary 3x3 matrix onto rank 2 and unit norm"""
        return cls(frame_pair, _canonical(_enforce_rank2(np.asarray(matrix, dtype=np.float64)[None]))[0])


MatrixLike = Union[FundamentalMatrix, np.ndarray]


def _as_array(F: MatrixLike) -> np.ndarray:
    return F.matrix if isinstance(F, FundamentalMatrix) else np.asarray(F, dtype=np.float64)


def _homogeneous(points: np.ndarray) -> np.ndarray:
    return np.concatenate([points, np.ones(points.shape[:-1] + (1,))], axis=-1)


def _enforce_rank2(F: np.ndarray) -> np.ndarray:
    U, S, Vt = np.linalg.svd(F)
    S[..., 2] = 0.0
    return U @ (S[..., :, None] * Vt)


def _canonical(F: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm with the largest-magnitude entry positive"""
    norms = np.linalg.norm(F.reshape(len(F), 9), axis=1)
    norms = np.where(norms > 0, norms, 1.0)
    F = F / norms[:, None, None]
    flat = F.reshape(len(F), 9)
    pivot = flat[np.arange(len(F)), np.abs(flat).argmax(axis=1)]
    return F * np.where(pivot < 0, -1.0, 1.0)[:, None, None]


def _normalize(points: np.ndarray):
    """Isotropic normalization: centroid to origin, mean distance sqrt(2)"""
    centroid = points.mean(axis=1)
    centered = points - centroid[:, None, :]
    mean_dist = np.linalg.norm(centered, axis=2).mean(axis=1)
    valid = mean_dist > 1e-12 * (1.0 + np.abs(centroid).max(axis=1))
    scale = np.where(valid, SQRT2 / np.where(valid, mean_dist, 1.0), 1.0)

    T = np.zeros((len(points), 3, 3))
    T[:, 0, 0] = scale
    T[:, 1, 1] = scale
    T[:, 0, 2] = -scale * centroid[:, 0]
    T[:, 1, 2] = -scale * centroid[:, 1]
    T[:, 2, 2] = 1.0
    return centered * scale[:, None, None], T, valid


def _mostly_collinear(points: np.ndarray, max_fraction: float) -> np.ndarray:
    """True where more than max_fraction of a point set lies on one line through two of its points"""
    batch, n, _ = points.shape
    spots = np.unique(np.linspace(0, n - 1, min(n, COLLINEAR_SPOTS)).round().astype(int))
    a_idx, b_idx = np.triu_indices(len(spots), k=1)
    a = points[:, spots[a_idx]]
    b = points[:, spots[b_idx]]
    direction = b - a
    length = np.linalg.norm(direction, axis=2)
    usable = length > COLLINEAR_TOL
    normal = np.stack([-direction[..., 1], direction[..., 0]], axis=-1) / np.where(usable, length, 1.0)[..., None]
    # (batch, lines, n)
    offsets = points[:, None, :, :] - a[:, :, None, :]
    dist = np.abs(np.einsum("blnc,blc->bln", offsets, normal))
    on_line = np.where(usable[..., None], dist < COLLINEAR_TOL, False).sum(axis=2)
    return on_line.max(axis=1, initial=0) > max_fraction * n


def estimate_fundamental_batch(points_j: np.ndarray, points_k: np.ndarray,
                               max_condition: float = 1e10,
                               max_collinear_fraction: float = 0.75) -> Tuple[np.ndarray, np.ndarray]:
    """
    Normalized 8-point estimates for a batch of independent correspondence sets

    Args:
        points_j: (B, n, 2) points in the first frame of each pair
        points_k: (B, n, 2) matching points in the second frame
        max_condition: Design matrices above this condition number are degenerate
        max_collinear_fraction: Point sets with more collinear points than this are degenerate

    Returns:
        tuple: (F of shape (B, 3, 3), valid mask of shape (B,)); invalid rows hold zeros
    """
    points_j = np.asarray(points_j, dtype=np.float64)
    points_k = np.asarray(points_k, dtype=np.float64)
    batch, n = points_j.shape[:2]
    if n < 8:
        return np.zeros((batch, 3, 3)), np.zeros(batch, dtype=bool)

    finite = np.isfinite(points_j).all(axis=(1, 2)) & np.isfinite(points_k).all(axis=(1, 2))
    points_j = np.where(finite[:, None, None], points_j, 0.0)
    points_k = np.where(finite[:, None, None], points_k, 0.0)

    norm_j, T_j, valid_j = _normalize(points_j)
    norm_k, T_k, valid_k = _normalize(points_k)

    x1, y1 = norm_j[..., 0], norm_j[..., 1]
    x2, y2 = norm_k[..., 0], norm_k[..., 1]
    A = np.stack([x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, np.ones_like(x1)], axis=-1)
    if n < 9:
        A = np.concatenate([A, np.zeros((batch, 9 - n, 9))], axis=1)

    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    well_conditioned = s[:, 7] * max_condition > s[:, 0]

    F = _enforce_rank2(Vt[:, -1, :].reshape(batch, 3, 3))
    F = np.transpose(T_k, (0, 2, 1)) @ F @ T_j
    F = _canonical(F)

    valid = finite & valid_j & valid_k & well_conditioned
    valid &= ~_mostly_collinear(norm_j, max_collinear_fraction)
    valid &= ~_mostly_collinear(norm_k, max_collinear_fraction)
    valid &= np.isfinite(F).all(axis=(1, 2))
    return np.where(valid[:, None, None], F, 0.0), valid


def estimate_fundamental(points_j, points_k, frame_pair: Tuple[int, int] = (0, 1),
                         params: GeometryParams = None) -> FundamentalMatrix:
    """
    Estimate F from at least eight correspondences with the normalized 8-point algorithm

    Args:
        points_j: (n, 2) points in frame j
        points_k: (n, 2) matching points in frame k
        frame_pair: The (j, k) pair the matrix belongs to
        params: Degeneracy thresholds

    Returns:
        FundamentalMatrix with rank 2 and unit Frobenius norm

    Raises:
        DegenerateConfigurationError: too few points, ill-conditioned or mostly collinear input
    """
    params = params or GeometryParams()
    points_j = np.asarray(points_j, dtype=np.float64).reshape(-1, 2)
    points_k = np.asarray(points_k, dtype=np.float64).reshape(-1, 2)
    if len(points_j) != len(points_k):
        raise ValueError(f"Point count mismatch: {len(points_j)} vs {len(points_k)}")
    if len(points_j) < 8:
        raise DegenerateConfigurationError(f"Need at least 8 correspondences, got {len(points_j)}")

    F, valid = estimate_fundamental_batch(points_j[None], points_k[None],
                                          params.max_condition, params.max_collinear_fraction)
    if not valid[0]:
        raise DegenerateConfigurationError(f"Degenerate correspondences for frame pair {frame_pair}")
    return FundamentalMatrix(frame_pair, F[0])


def epipolar_distances(F: np.ndarray, points_j: np.ndarray, points_k: np.ndarray) -> np.ndarray:
    """
    Distance from each p_k to the epipolar line F p_j

    Args:
        F: (..., 3, 3) matrices
        points_j: (..., n, 2)
        points_k: (..., n, 2)

    Returns:
        (..., n) distances in pixels; +inf where the line is undefined, NaN where a point is missing
    """
    lines = np.einsum("...ab,...nb->...na", F, _homogeneous(points_j))
    numerator = np.abs(np.einsum("...na,...na->...n", lines, _homogeneous(points_k)))
    denominator = np.hypot(lines[..., 0], lines[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        distances = numerator / denominator
    return np.where((denominator == 0) & np.isfinite(numerator), np.inf, distances)


def geometric_error(p_j, p_k, F: MatrixLike) -> float:
    """
    One-directional point-to-epipolar-line distance d(p_k, F p_j)

    Returns +inf when F p_j has no direction (p_j images the epipole).
    """
    p_j = np.asarray(p_j, dtype=np.float64).reshape(1, 2)
    p_k = np.asarray(p_k, dtype=np.float64).reshape(1, 2)
    return float(epipolar_distances(_as_array(F), p_j, p_k)[0])
