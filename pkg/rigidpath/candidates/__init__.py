"""
Motion candidate proposal
"""

from rigidpath.candidates.baseline import global_ransac_baseline
from rigidpath.candidates.cell_grid import Cell, CellGrid, build_grid
from rigidpath.candidates.proposer import (
    ORIGIN_CELL,
    ORIGIN_COMBO,
    ORIGIN_FALLBACK,
    deduplicate,
    format_candidate_dump,
    global_fallback,
    jaccard,
    propose_clip_candidates,
)
from rigidpath.candidates.ransac import (
    ClipContext,
    RansacParams,
    adaptive_bound,
    propose_cell_motion,
    ransac_motion,
    required_positive,
    work_rng,
)

__all__ = [
    'global_ransac_baseline', 'Cell', 'CellGrid', 'build_grid', 'ORIGIN_CELL', 'ORIGIN_COMBO',
    'ORIGIN_FALLBACK', 'deduplicate', 'format_candidate_dump', 'global_fallback', 'jaccard',
    'propose_clip_candidates', 'ClipContext', 'RansacParams', 'propose_cell_motion',
    'ransac_motion', 'work_rng', 'adaptive_bound', 'required_positive',
]
