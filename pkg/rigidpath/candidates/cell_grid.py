"""
Overlapping square cells over a clip's starting frame
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from rigidpath.trajcore import VideoMeta


@dataclass(frozen=True)
class Cell:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in pixels"""
    index: int
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def origin(self) -> str:
        return f"{self.x0:g},{self.y0:g}"

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Mask of (n, 2) points inside the closed rectangle"""
        return ((points[:, 0] >= self.x0) & (points[:, 0] <= self.x1)
                & (points[:, 1] >= self.y0) & (points[:, 1] <= self.y1))


@dataclass(frozen=True)
class CellGrid:
    """Cells of size L x L whose origins are spaced L * (1 - overlap_ratio) apart"""
    cell_size: float
    overlap_ratio: float
    cells: tuple

    def __len__(self) -> int:
        return len(self.cells)


def _origins(extent: float, size: float, step: float) -> List[float]:
    origins = [0.0]
    while origins[-1] + size < extent:
        origins.append(origins[-1] + step)
    return origins


def build_grid(meta: VideoMeta, cell_size: Optional[float] = None, overlap_ratio: float = 0.3) -> CellGrid:
    """
    Tile the frame with overlapping cells, clipped to the image

    Args:
        meta: Video geometry
        cell_size: Side L in pixels; defaults to a fifth of the frame width
        overlap_ratio: Fraction of L shared by neighbouring cells

    Returns:
        CellGrid covering every pixel of the frame
    """
    if not 0 <= overlap_ratio < 1:
        raise ValueError(f"overlap_ratio must be in [0, 1), got {overlap_ratio}")
    size = float(cell_size) if cell_size else meta.frame_width / 5.0
    if size <= 0:
        raise ValueError(f"cell_size must be positive, got {size}")
    step = size * (1.0 - overlap_ratio)

    cells = []
    for y0 in _origins(meta.frame_height, size, step):
        for x0 in _origins(meta.frame_width, size, step):
            cells.append(Cell(len(cells), x0, y0,
                              min(x0 + size, float(meta.frame_width)),
                              min(y0 + size, float(meta.frame_height))))
    return CellGrid(size, overlap_ratio, tuple(cells))
