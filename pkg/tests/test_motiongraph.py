"""
Tests for motion graph weights and dominant path selection
"""

import math
import time
from fractions import Fraction
from types import SimpleNamespace

import networkx as nx
import numpy as np
import pytest

from rigidpath.candidates import RansacParams, build_grid, propose_clip_candidates
from rigidpath.clips import ClipParams, generate_clips
from rigidpath.errors import ConsistencyError
from rigidpath.geometry import GeometryParams, RigidMotion
from rigidpath.motiongraph import (
    GraphParams,
    MotionGraph,
    build_graph,
    dominant_path,
    edge_weight,
    error_weight,
    format_graph_dump,
    format_path,
    node_base,
    path_score,
)
from rigidpath.synth import SceneSpec, linear_camera_path, render_scene
from rigidpath.trajcore import SubTrajectoryTable, SubTrajectoryValue, TrackArray, sub_trajectory_values


def table(spans):
    """SubTrajectoryTable from {trajectory id: clip indices}"""
    return SubTrajectoryTable(
        SubTrajectoryValue(tid, ci, Fraction(1, len(clips)))
        for tid, clips in spans.items() for ci in clips
    )


def motion(clip_index, errors):
    return RigidMotion(clip_index, {}, member_ids=frozenset(errors), member_errors=errors)


class TestEdgeWeight:
    @pytest.fixture
    def subvalues(self):
        # 1 spans both clips, 2 appears in clip 1, 3 is visible in both but only a member of the later motion
        return table({1: (0, 1), 2: (1,), 3: (0, 1)})

    def test_common_and_new(self, subvalues):
        prev = motion(0, {1: 0.0})
        nxt = motion(1, {1: 0.0, 2: 0.0})
        assert edge_weight(prev, nxt, subvalues) == pytest.approx(1.5)

    def test_error_discounts_the_common_term(self, subvalues):
        prev = motion(0, {1: 0.0})
        nxt = motion(1, {1: 0.15, 2: 0.0})
        assert edge_weight(prev, nxt, subvalues) == pytest.approx(1 + 0.5 * math.exp(-0.5))

    def test_members_seen_earlier_do_not_count_as_new(self, subvalues):
        prev = motion(0, {1: 0.0})
        nxt = motion(1, {1: 0.0, 3: 0.0})
        assert edge_weight(prev, nxt, subvalues) == pytest.approx(0.5)

    def test_untestable_member_is_heavily_discounted(self, subvalues):
        prev = motion(0, {1: 0.0})
        nxt = RigidMotion(1, {}, member_ids=frozenset({1, 2}), member_errors={1: 0.0})
        expected = 0.5 + math.exp(-(3.0 ** 2) / (2 * 0.15 ** 2))
        assert edge_weight(prev, nxt, subvalues) == pytest.approx(expected)

    def test_error_weight(self):
        assert error_weight(0.0, 0.15, 1.5) == 1.0
        assert error_weight(0.15, 0.15, 1.5) == pytest.approx(math.exp(-0.5))
        assert error_weight(None, 0.15, 1.5) == error_weight(3.0, 0.15, 1.5)
        assert error_weight(float("inf"), 0.15, 1.5) == error_weight(3.0, 0.15, 1.5)

    def test_node_base(self, subvalues):
        first = motion(0, {1: 0.0, 3: 0.15})
        assert node_base(first, subvalues) == pytest.approx(0.5 + 0.5 * math.exp(-0.5))


def test_build_graph_edges_follow_shared_members():
    subvalues = table({tid: (0, 1) for tid in (1, 2, 3, 4)})
    zero = dict.fromkeys
    candidates = [
        [motion(0, zero({1, 2}, 0.0)), motion(0, zero({3}, 0.0))],
        [motion(1, zero({2, 3}, 0.0)), motion(1, zero({4}, 0.0))],
    ]
    clips = [SimpleNamespace(index=0), SimpleNamespace(index=1)]
    graph = build_graph(clips, candidates, subvalues, GeometryParams(), GraphParams())
    assert set(graph.edges) == {(0, 0, 0), (0, 1, 0)}
    assert graph.edges[(0, 0, 0)] == pytest.approx(0.5)
    assert graph.omega == pytest.approx((1.0, 0.5))
    assert graph.node_sizes == ((2, 1), (2, 1))

    dump = format_graph_dump(graph).splitlines()
    assert dump[0] == "NODE 0 0 2 1.0"
    assert "NODE 1 1 1 -" in dump
    assert dump[-1].startswith("EDGE 0 1 0 ")


def test_build_graph_rejects_empty_clip():
    with pytest.raises(ConsistencyError):
        build_graph([SimpleNamespace(index=0)], [[]], table({}))


class TestGraphValidation:
    @pytest.mark.parametrize("kwargs", [
        {"layer_sizes": (1, 0), "omega": (1.0,)},
        {"layer_sizes": (2, 1), "omega": (1.0,)},
        {"layer_sizes": (1, 1), "omega": (1.0,), "edges": {(0, 0, 1): 1.0}},
        {"layer_sizes": (1, 1), "omega": (1.0,), "edges": {(1, 0, 0): 1.0}},
        {"layer_sizes": (1, 1), "omega": (1.0,), "edges": {(0, 0, 0): -0.1}},
    ])
    def test_invalid_graphs(self, kwargs):
        with pytest.raises(ConsistencyError):
            MotionGraph(**kwargs)


class TestDominantPath:
    def test_hand_graph(self):
        graph = MotionGraph((2, 2), (1.0, 2.0), {(0, 0, 0): 5.0, (0, 1, 1): 1.0})
        path = dominant_path(graph)
        assert path.nodes == (0, 0)
        assert path.score == 6.0
        assert not path.bridged
        assert format_path(path) == "PATH 6.0 0 0 0\n"

    def test_single_clip(self):
        path = dominant_path(MotionGraph((3,), (1.0, 3.0, 2.0)))
        assert path.nodes == (1,) and path.score == 3.0

    def test_single_chain(self):
        graph = MotionGraph((1, 1, 1), (0.5,), {(0, 0, 0): 1.25, (1, 0, 0): 2.0})
        path = dominant_path(graph)
        assert path.nodes == (0, 0, 0)
        assert path.score == 3.75

    def test_ties_go_to_the_smaller_path(self):
        graph = MotionGraph((2, 2), (2.0, 2.0), {(0, 0, 1): 1.0, (0, 1, 0): 1.0})
        assert dominant_path(graph).nodes == (0, 1)

    def test_unreachable_layer_is_bridged(self):
        graph = MotionGraph((1, 2, 1), (1.0,), {(0, 0, 0): 2.0},
                            node_sizes=((5,), (3, 7), (4,)))
        path = dominant_path(graph)
        assert path.nodes == (0, 0, 0)
        assert path.bridged
        assert path.bridges == ((1, 0, 0),)
        assert path.score == 3.0
        assert path_score(graph, path.nodes, path.bridges) == path.score

    def test_bridge_targets_the_largest_node(self):
        graph = MotionGraph((2, 3), (1.0, 4.0), node_sizes=((9, 2), (1, 8, 8)))
        path = dominant_path(graph)
        # source is the largest previous node, not the best-scoring one
        assert path.nodes == (0, 1)
        assert path.bridges == ((0, 0, 1),)
        assert path.score == 1.0

    def test_path_score_errors(self):
        graph = MotionGraph((1, 1), (1.0,), {(0, 0, 0): 1.0})
        with pytest.raises(ConsistencyError):
            path_score(graph, (0,))
        with pytest.raises(ConsistencyError):
            path_score(MotionGraph((1, 1), (1.0,)), (0, 0))

    def test_motion_needs_candidates(self):
        path = dominant_path(MotionGraph((1,), (1.0,)))
        with pytest.raises(ConsistencyError):
            path.motion(0)


def random_connected_graph(rng):
    clips = int(rng.integers(1, 7))
    sizes = tuple(int(s) for s in rng.integers(1, 5, clips))
    omega = tuple(float(w) for w in rng.random(sizes[0]) * 3.0)
    edges = {}
    for clip in range(clips - 1):
        for dst in range(sizes[clip + 1]):
            for src in range(sizes[clip]):
                if rng.random() < 0.6:
                    edges[(clip, src, dst)] = float(rng.random() * 5.0)
            if not any((clip, src, dst) in edges for src in range(sizes[clip])):
                edges[(clip, int(rng.integers(sizes[clip])), dst)] = float(rng.random() * 5.0)
    return MotionGraph(sizes, omega, edges)


def exhaustive_best(graph):
    """Best (score, nodes) over every source-to-sink path, scored in clip order"""
    dag = nx.DiGraph()
    last = graph.clip_count - 1
    for j in range(graph.layer_sizes[0]):
        dag.add_edge("source", (0, j))
    for (clip, src, dst) in graph.edges:
        dag.add_edge((clip, src), (clip + 1, dst))
    for j in range(graph.layer_sizes[last]):
        dag.add_edge((last, j), "sink")

    best = None
    for route in nx.all_simple_paths(dag, "source", "sink"):
        nodes = tuple(idx for _, idx in route[1:-1])
        score = float(graph.omega[nodes[0]])
        for clip in range(last):
            score += graph.edges[(clip, nodes[clip], nodes[clip + 1])]
        if best is None or score > best[0] or (score == best[0] and nodes < best[1]):
            best = (score, nodes)
    return best


def test_matches_exhaustive_enumeration():
    rng = np.random.default_rng(2024)
    elapsed = 0.0
    for _ in range(200):
        graph = random_connected_graph(rng)
        score, nodes = exhaustive_best(graph)
        started = time.perf_counter()
        path = dominant_path(graph)
        elapsed += time.perf_counter() - started
        assert not path.bridged
        assert path.nodes == nodes
        assert path.score == pytest.approx(score, abs=1e-9)
        assert path_score(graph, path.nodes) == pytest.approx(path.score, abs=1e-9)
    assert elapsed < 5.0


def test_raising_an_on_path_edge_keeps_the_path():
    rng = np.random.default_rng(99)
    for _ in range(50):
        graph = random_connected_graph(rng)
        path = dominant_path(graph)
        if graph.clip_count < 2:
            continue
        clip = int(rng.integers(graph.clip_count - 1))
        key = (clip, path.nodes[clip], path.nodes[clip + 1])
        boosted = dict(graph.edges)
        boosted[key] += 1.0
        again = dominant_path(MotionGraph(graph.layer_sizes, graph.omega, boosted))
        assert again.nodes == path.nodes
        assert again.score == pytest.approx(path.score + 1.0)


def test_wide_graph_is_solved_quickly():
    rng = np.random.default_rng(8)
    sizes = (20,) * 20
    edges = {(clip, src, dst): float(rng.random())
             for clip in range(19) for src in range(20) for dst in range(20)}
    started = time.perf_counter()
    path = dominant_path(MotionGraph(sizes, tuple(rng.random(20).tolist()), edges))
    assert time.perf_counter() - started < 5.0
    assert len(path.nodes) == 20 and not path.bridged


def test_vectorized_edges_match_edge_weight():
    rng = np.random.default_rng(31)
    for _ in range(20):
        clips = int(rng.integers(2, 5))
        spans = {}
        for tid in range(40):
            first = int(rng.integers(clips))
            spans[tid] = tuple(range(first, int(rng.integers(first, clips)) + 1))
        subvalues = table(spans)
        candidates = []
        for clip in range(clips):
            visible = [tid for tid, span in spans.items() if clip in span]
            motions = []
            for _ in range(int(rng.integers(1, 4))):
                members = [tid for tid in visible if rng.random() < 0.5] or visible[:1]
                errors = {tid: (float("nan") if rng.random() < 0.1 else float(rng.random() * 0.4))
                          for tid in members if rng.random() < 0.9}
                motions.append(RigidMotion(clip, {}, member_ids=frozenset(members), member_errors=errors))
            candidates.append(motions)
        if not all(any(m.member_ids for m in motions) for motions in candidates):
            continue

        graph = build_graph([SimpleNamespace(index=c) for c in range(clips)], candidates, subvalues)
        for clip in range(clips - 1):
            for src, prev in enumerate(candidates[clip]):
                for dst, nxt in enumerate(candidates[clip + 1]):
                    key = (clip, src, dst)
                    if prev.member_ids & nxt.member_ids:
                        assert graph.edges[key] == pytest.approx(edge_weight(prev, nxt, subvalues), abs=1e-12)
                    else:
                        assert key not in graph.edges
        assert graph.omega == pytest.approx(tuple(node_base(m, subvalues) for m in candidates[0]))


def test_parallel_chains_pick_the_larger_body():
    # 40 trajectories of one body and 60 of another, both visible in all three clips
    small, large = range(40), range(40, 100)
    subvalues = table({tid: (0, 1, 2) for tid in range(100)})
    candidates = [[motion(c, dict.fromkeys(small, 0.0)), motion(c, dict.fromkeys(large, 0.0))]
                  for c in range(3)]
    graph = build_graph([SimpleNamespace(index=c) for c in range(3)], candidates, subvalues)
    assert set(graph.edges) == {(c, i, i) for c in range(2) for i in range(2)}
    assert graph.edges[(0, 0, 0)] == pytest.approx(40 / 3)
    assert graph.edges[(1, 1, 1)] == pytest.approx(20.0)

    path = dominant_path(graph)
    assert path.nodes == (1, 1, 1)
    assert path.score == pytest.approx(60.0)
    assert not path.bridged


def test_background_chain_over_five_clips():
    spec = SceneSpec(
        camera=linear_camera_path(26, velocity=(0.08, 0.0, 0.0)),
        background_count=400,
        depth_range=(6.0, 20.0),
        turnover=0.0,
        noise_px=0.0,
    )
    meta, trajs, _ = render_scene(spec, seed=9)
    clips = generate_clips(trajs, meta, ClipParams(max_clip_len=10))
    assert [(c.first, c.last) for c in clips] == [(0, 9), (4, 13), (8, 17), (12, 21), (16, 25)]

    tracks = TrackArray(trajs, meta.frame_count)
    grid = build_grid(meta)
    params = RansacParams(iterations=60)
    candidates = [propose_clip_candidates(clip, tracks, grid, GeometryParams(), params) for clip in clips]
    graph = build_graph(clips, candidates, SubTrajectoryTable(sub_trajectory_values(trajs, clips)))
    path = dominant_path(graph)
    assert len(path.nodes) == 5
    assert not path.bridged
    for clip in clips:
        chosen = path.motion(clip.index)
        assert len(chosen.member_ids & clip.full_ids) >= 0.8 * len(clip.full_ids)
