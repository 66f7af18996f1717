"""
Motion graph and dominant path selection
"""

from rigidpath.motiongraph.dominant_path import MotionPath, dominant_path, format_path, path_score
from rigidpath.motiongraph.graph import (
    GraphParams,
    MotionGraph,
    build_graph,
    edge_weight,
    error_weight,
    error_weights,
    format_graph_dump,
    node_base,
)

__all__ = [
    'MotionPath', 'dominant_path', 'format_path', 'path_score', 'GraphParams', 'MotionGraph',
    'build_graph', 'edge_weight', 'error_weight', 'error_weights', 'format_graph_dump', 'node_base',
]
