"""
Dominant motion path by dynamic programming over the motion graph
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from loguru import logger

from rigidpath.errors import ConsistencyError
from rigidpath.geometry import RigidMotion
from rigidpath.motiongraph.graph import EdgeKey, MotionGraph

# (score, node indices from clip 0)
_Entry = Tuple[float, Tuple[int, ...]]


@dataclass(frozen=True)
class MotionPath:
    """One candidate per clip, connected clip to clip"""
    nodes: Tuple[int, ...]
    score: float
    bridged: bool = False
    bridges: Tuple[EdgeKey, ...] = ()
    motions: Optional[Tuple[RigidMotion, ...]] = None

    def node(self, clip_index: int) -> int:
        return self.nodes[clip_index]

    def motion(self, clip_index: int) -> RigidMotion:
        if self.motions is None:
            raise ConsistencyError("Path was computed on a graph without candidates")
        return self.motions[clip_index]


def _better(a: _Entry, b: Optional[_Entry]) -> bool:
    """Higher score wins; equal scores go to the lexicographically smaller path"""
    if b is None:
        return True
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


def _largest(sizes: Sequence[int], among: Sequence[int]) -> int:
    return min(among, key=lambda idx: (-sizes[idx], idx))


def dominant_path(graph: MotionGraph) -> MotionPath:
    """
    Highest-scoring path through every clip

    The score of a path is Omega of its first node plus the weights of its
    edges. Layers that no edge reaches are bridged with a zero-weight edge
    between the largest reachable node of the previous layer and the largest
    node of the layer; the result is then flagged as bridged.

    Returns:
        MotionPath with the chosen candidate index per clip
    """
    best: Dict[int, _Entry] = {j: (float(graph.omega[j]), (j,)) for j in range(graph.layer_sizes[0])}
    bridges = []

    for clip in range(1, graph.clip_count):
        layer: Dict[int, _Entry] = {}
        for dst, sources in graph.incoming(clip).items():
            for src, weight in sources:
                if src not in best:
                    continue
                score, nodes = best[src]
                entry = (score + weight, nodes + (dst,))
                if _better(entry, layer.get(dst)):
                    layer[dst] = entry

        if not layer:
            src = _largest(graph.node_sizes[clip - 1], sorted(best))
            dst = _largest(graph.node_sizes[clip], range(graph.layer_sizes[clip]))
            score, nodes = best[src]
            layer[dst] = (score, nodes + (dst,))
            bridges.append((clip - 1, src, dst))
            logger.warning(f"No edge reaches clip {clip}, bridging node {src} -> {dst}")
        best = layer

    winner: Optional[_Entry] = None
    for entry in best.values():
        if _better(entry, winner):
            winner = entry
    score, nodes = winner

    motions = None
    if graph.candidates is not None:
        motions = tuple(graph.candidates[clip][idx] for clip, idx in enumerate(nodes))
    path = MotionPath(nodes, score, bool(bridges), tuple(bridges), motions)
    logger.info(f"Dominant path score {score:.3f}{' (bridged)' if bridges else ''}")
    return path


def path_score(graph: MotionGraph, nodes: Sequence[int], bridges: Sequence[EdgeKey] = ()) -> float:
    """
    Omega of the first node plus every edge weight along `nodes`

    Raises:
        ConsistencyError: consecutive nodes are neither joined by an edge nor bridged
    """
    if len(nodes) != graph.clip_count:
        raise ConsistencyError(f"Path has {len(nodes)} nodes for {graph.clip_count} clips")
    allowed = set(bridges)
    score = float(graph.omega[nodes[0]])
    for clip in range(graph.clip_count - 1):
        key = (clip, nodes[clip], nodes[clip + 1])
        if key in graph.edges:
            score += graph.edges[key]
        elif key not in allowed:
            raise ConsistencyError(f"No edge {key}")
    return score


def format_path(path: MotionPath) -> str:
    nodes = " ".join(str(n) for n in path.nodes)
    return f"PATH {path.score!r} {int(path.bridged)} {nodes}\n"
