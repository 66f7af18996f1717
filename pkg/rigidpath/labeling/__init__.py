"""
Trajectory labeling from the dominant path
"""

from rigidpath.labeling.background import (
    BackgroundParams,
    GlobalBackgroundMotion,
    fit_global_motion,
    label_all,
    path_labels,
    reliable_background_ids,
)
from rigidpath.labeling.label_filter import FilterParams, filter_labels, neighbor_pairs, pair_weights
from rigidpath.labeling.labels import BACKGROUND, FOREGROUND, LabelStage, LabelState

__all__ = [
    'BackgroundParams', 'GlobalBackgroundMotion', 'fit_global_motion', 'label_all', 'path_labels',
    'reliable_background_ids', 'FilterParams', 'filter_labels', 'neighbor_pairs', 'pair_weights',
    'BACKGROUND', 'FOREGROUND', 'LabelStage', 'LabelState',
]
