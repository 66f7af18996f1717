"""
Directed motion graph across consecutive clips
"""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from rigidpath.clips import Clip
from rigidpath.errors import ConsistencyError
from rigidpath.geometry import GeometryParams, RigidMotion
from rigidpath.trajcore import SubTrajectoryTable

EdgeKey = Tuple[int, int, int]


@dataclass
class GraphParams:
    """Geometric-error weighting of trajectory credit"""
    sigma: float = 0.15

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def error_weight(g: Optional[float], sigma: float, epsilon_f: float) -> float:
    """
    G = exp(-g^2 / (2 sigma^2)) for a mean geometric error g in pixels

    An unknown or non-finite error counts as 2 * epsilon_f.
    """
    if g is None or not math.isfinite(g):
        g = 2.0 * epsilon_f
    return math.exp(-(g * g) / (2.0 * sigma * sigma))


def edge_weight(prev: RigidMotion, nxt: RigidMotion, subvalues: SubTrajectoryTable,
                geometry: GeometryParams = None, params: GraphParams = None) -> float:
    """
    Weight of the edge prev -> nxt between clips i and i + 1

    Members of both candidates contribute their clip i + 1 value, and members
    of nxt that are not visible in clip i contribute theirs; each term is
    scaled by the error weight of the trajectory under nxt.
    """
    geometry = geometry or GeometryParams()
    params = params or GraphParams()
    clip_index = nxt.clip_index
    prev_clip = prev.clip_index

    weight = 0.0
    for tid in sorted(nxt.member_ids):
        if tid not in prev.member_ids and (tid, prev_clip) in subvalues:
            continue
        weight += (error_weight(nxt.mean_error(tid), params.sigma, geometry.epsilon_f)
                   * subvalues.value(tid, clip_index))
    return weight


def node_base(motion: RigidMotion, subvalues: SubTrajectoryTable,
              geometry: GeometryParams = None, params: GraphParams = None) -> float:
    """Omega of a first-clip candidate: weighted value of all of its members"""
    geometry = geometry or GeometryParams()
    params = params or GraphParams()
    return sum(error_weight(motion.mean_error(tid), params.sigma, geometry.epsilon_f)
               * subvalues.value(tid, motion.clip_index)
               for tid in sorted(motion.member_ids))


@dataclass
class MotionGraph:
    """
    Layered DAG of candidates

    Node (clip, idx) is the idx-th candidate of clip; edges map
    (clip, from_idx, to_idx) -> weight for clip -> clip + 1.
    """
    layer_sizes: Tuple[int, ...]
    omega: Tuple[float, ...]
    edges: Dict[EdgeKey, float] = field(default_factory=dict)
    node_sizes: Optional[Tuple[Tuple[int, ...], ...]] = None
    candidates: Optional[Tuple[Tuple[RigidMotion, ...], ...]] = None

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if not self.layer_sizes or min(self.layer_sizes) < 1:
            raise ConsistencyError(f"Every clip needs at least one candidate: {self.layer_sizes}")
        if len(self.omega) != self.layer_sizes[0]:
            raise ConsistencyError("Omega must have one value per first-clip candidate")
        if self.node_sizes is None:
            self.node_sizes = tuple((0,) * n for n in self.layer_sizes)
        for (clip, src, dst), weight in self.edges.items():
            if not (0 <= clip < len(self.layer_sizes) - 1 and 0 <= src < self.layer_sizes[clip]
                    and 0 <= dst < self.layer_sizes[clip + 1]):
                raise ConsistencyError(f"Edge {(clip, src, dst)} outside the graph")
            if weight < 0:
                raise ConsistencyError(f"Negative weight on edge {(clip, src, dst)}")

    @property
    def clip_count(self) -> int:
        return len(self.layer_sizes)

    def incoming(self, clip: int) -> Dict[int, List[Tuple[int, float]]]:
        """Edges into layer `clip` grouped by target: to_idx -> [(from_idx, weight)]"""
        grouped: Dict[int, List[Tuple[int, float]]] = {}
        for (c, src, dst), weight in sorted(self.edges.items()):
            if c == clip - 1:
                grouped.setdefault(dst, []).append((src, weight))
        return grouped


def error_weights(errors: np.ndarray, sigma: float, epsilon_f: float) -> np.ndarray:
    """Vectorized error_weight; NaN and infinite errors count as 2 * epsilon_f"""
    errors = np.where(np.isfinite(errors), errors, 2.0 * epsilon_f)
    return np.exp(-(errors * errors) / (2.0 * sigma * sigma))


def _member_matrix(motions: Sequence[RigidMotion], index: np.ndarray) -> np.ndarray:
    members = np.zeros((len(motions), len(index)), dtype=bool)
    for row, motion in enumerate(motions):
        if motion.member_ids:
            members[row, np.searchsorted(index, sorted(motion.member_ids))] = True
    return members


def _layer_edges(prev: Sequence[RigidMotion], nxt: Sequence[RigidMotion], clip: int,
                 subvalues: SubTrajectoryTable, geometry: GeometryParams,
                 params: GraphParams) -> Dict[EdgeKey, float]:
    """edge_weight for every candidate pair of two layers sharing a member, as matrix products"""
    index = np.array(sorted(set().union(*(m.member_ids for m in prev), *(m.member_ids for m in nxt))),
                     dtype=np.int64)
    if not len(index):
        return {}
    prev_members = _member_matrix(prev, index)
    next_members = _member_matrix(nxt, index)

    weights = np.zeros(next_members.shape)
    for row, motion in enumerate(nxt):
        cols = np.flatnonzero(next_members[row])
        errors = np.array([motion.member_errors.get(int(t), np.nan) for t in index[cols]], dtype=np.float64)
        values = np.array([subvalues.value(int(t), motion.clip_index) for t in index[cols]])
        weights[row, cols] = error_weights(errors, params.sigma, geometry.epsilon_f) * values

    # a member of nxt counts unless prev passed it over while it was visible in prev's clip
    seen: Dict[int, np.ndarray] = {}
    counted = np.empty(prev_members.shape, dtype=bool)
    for row, motion in enumerate(prev):
        if motion.clip_index not in seen:
            seen[motion.clip_index] = np.array([(int(t), motion.clip_index) in subvalues for t in index],
                                               dtype=bool)
        counted[row] = prev_members[row] | ~seen[motion.clip_index]

    shared = prev_members.astype(np.float64) @ next_members.T.astype(np.float64)
    totals = counted.astype(np.float64) @ weights.T
    return {(clip, int(a), int(b)): float(totals[a, b]) for a, b in zip(*np.nonzero(shared > 0))}


def build_graph(clips: Sequence[Clip], candidates: Sequence[Sequence[RigidMotion]],
                subvalues: SubTrajectoryTable, geometry: GeometryParams = None,
                params: GraphParams = None, executor: Optional[Executor] = None) -> MotionGraph:
    """
    Build the motion graph

    Args:
        clips: Clips in order
        candidates: Candidates per clip, aligned with clips
        subvalues: Sub-trajectory values
        geometry: Supplies epsilon_f for untestable trajectories
        params: Error weighting
        executor: Optional pool; layers are weighted independently

    Returns:
        MotionGraph with an edge wherever two consecutive candidates share a member
    """
    geometry = geometry or GeometryParams()
    params = params or GraphParams()
    if len(candidates) != len(clips):
        raise ConsistencyError(f"{len(candidates)} candidate sets for {len(clips)} clips")
    for clip, motions in zip(clips, candidates):
        if not motions:
            raise ConsistencyError(f"Clip {clip.index} has no candidates")

    def layer(i: int) -> Dict[EdgeKey, float]:
        return _layer_edges(candidates[i], candidates[i + 1], i, subvalues, geometry, params)

    layers = range(len(clips) - 1)
    results = executor.map(layer, layers) if executor is not None else map(layer, layers)
    edges: Dict[EdgeKey, float] = {}
    for result in results:
        edges.update(result)

    graph = MotionGraph(
        layer_sizes=tuple(len(m) for m in candidates),
        omega=tuple(node_base(m, subvalues, geometry, params) for m in candidates[0]),
        edges=edges,
        node_sizes=tuple(tuple(len(m.member_ids) for m in motions) for motions in candidates),
        candidates=tuple(tuple(motions) for motions in candidates),
    )
    logger.info(f"Motion graph: {sum(graph.layer_sizes)} nodes over {graph.clip_count} clips, "
                f"{len(edges)} edges")
    return graph


def format_graph_dump(graph: MotionGraph) -> str:
    """Render `NODE clip idx n_members omega` and `EDGE clip from to weight` lines"""
    lines = []
    for clip, size in enumerate(graph.layer_sizes):
        for idx in range(size):
            omega = repr(float(graph.omega[idx])) if clip == 0 else "-"
            lines.append(f"NODE {clip} {idx} {graph.node_sizes[clip][idx]} {omega}")
    for (clip, src, dst), weight in sorted(graph.edges.items()):
        lines.append(f"EDGE {clip} {src} {dst} {float(weight)!r}")
    return "\n".join(lines) + "\n"
