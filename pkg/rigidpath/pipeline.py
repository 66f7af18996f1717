"""
End-to-end background identification: clips, candidates, motion graph, labels
"""

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from rigidpath.assumptions import assumption_flags
from rigidpath.candidates import (
    ORIGIN_FALLBACK,
    build_grid,
    format_candidate_dump,
    global_ransac_baseline,
    propose_clip_candidates,
)
from rigidpath.clips import Clip, format_clip_dump, generate_clips
from rigidpath.config.pipeline_config import PipelineConfig
from rigidpath.errors import PipelineError
from rigidpath.geometry import RigidMotion
from rigidpath.labeling import (
    GlobalBackgroundMotion,
    LabelStage,
    LabelState,
    filter_labels,
    fit_global_motion,
    label_all,
    path_labels,
    reliable_background_ids,
)
from rigidpath.metrics import MetricsReport, evaluate
from rigidpath.motiongraph import MotionGraph, MotionPath, build_graph, dominant_path, format_graph_dump, format_path
from rigidpath.trajcore import (
    SubTrajectoryTable,
    TrackArray,
    Trajectory,
    VideoMeta,
    read_trajectories,
    sub_trajectory_values,
    validate_trajectories,
    write_labels,
)


@contextmanager
def stage_timer(name: str, runtime: Dict[str, float]):
    start = time.perf_counter()
    yield
    runtime[name] = time.perf_counter() - start
    logger.info(f"Completed {name} in {runtime[name]:.2f}s")


@dataclass
class PipelineResult:
    """Everything a run produced"""
    labels: Dict[int, int]
    stages: Dict[str, LabelState]
    clips: List[Clip]
    candidates: List[List[RigidMotion]]
    graph: Optional[MotionGraph] = None
    path: Optional[MotionPath] = None
    background: Optional[GlobalBackgroundMotion] = None
    runtime: Dict[str, float] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    def report(self, ground_truth: Mapping[int, int]) -> MetricsReport:
        """Metrics of the final and per-stage labels, with timings, counts and flags"""
        report = evaluate(self.labels, ground_truth,
                          {name: state.labels for name, state in self.stages.items()})
        report.runtime = dict(self.runtime)
        report.counts = dict(self.counts)
        report.flags = list(self.flags)
        return report

    def write_dumps(self, output: Union[str, Path], clips: bool = False, candidates: bool = False,
                    graph: bool = False, stages: bool = False) -> List[Path]:
        """Write the requested diagnostics next to the output label file"""
        output = Path(output)
        stem = output.parent / output.stem
        written = []

        def write(path: Path, text: str):
            path.write_text(text, encoding="utf-8")
            written.append(path)

        if clips:
            write(Path(f"{stem}.clips.txt"), format_clip_dump(self.clips))
        if candidates:
            write(Path(f"{stem}.candidates.txt"), format_candidate_dump(self.candidates))
        if graph and self.graph is not None:
            text = format_graph_dump(self.graph)
            if self.path is not None:
                text += format_path(self.path)
            write(Path(f"{stem}.graph.txt"), text)
        if stages:
            for name, state in self.stages.items():
                path = Path(f"{stem}.{name}.labels")
                write_labels(path, state.labels)
                written.append(path)
        for path in written:
            logger.debug(f"Wrote {path}")
        return written


def _prepare(config: PipelineConfig, meta: VideoMeta, trajs: Sequence[Trajectory],
             runtime: Dict[str, float]) -> Tuple[List[Clip], SubTrajectoryTable, TrackArray]:
    if not trajs:
        raise PipelineError("No trajectories to label")
    try:
        validate_trajectories(meta, trajs)
    except ValueError as e:
        raise PipelineError(f"Invalid trajectories: {e}") from e

    with stage_timer("clips", runtime):
        clips = generate_clips(trajs, meta, config.clips)
        subvalues = SubTrajectoryTable(sub_trajectory_values(trajs, clips))
        tracks = TrackArray(trajs, meta.frame_count)
    return clips, subvalues, tracks


def run_pipeline(config: PipelineConfig, meta: VideoMeta, trajs: Sequence[Trajectory]) -> PipelineResult:
    """
    Label every trajectory as static background or not

    Args:
        config: Parameters of every stage
        meta: Video geometry
        trajs: All trajectories

    Returns:
        PipelineResult; labels are those of the last enabled stage

    Raises:
        PipelineError: no trajectories, no reliable background or too little of it
    """
    runtime: Dict[str, float] = {}
    logger.info(f"Labeling {len(trajs)} trajectories over {meta.frame_count} frames "
                f"(seed {config.rng_seed}, {config.threads} threads)")
    clips, subvalues, tracks = _prepare(config, meta, trajs, runtime)

    executor = ThreadPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
    try:
        with stage_timer("candidates", runtime):
            grid = build_grid(meta, config.ransac.cell_size, config.ransac.overlap_ratio)
            candidates = [propose_clip_candidates(clip, tracks, grid, config.geometry, config.ransac, executor)
                          for clip in clips]
        with stage_timer("graph", runtime):
            graph = build_graph(clips, candidates, subvalues, config.geometry, config.graph, executor)
            path = dominant_path(graph)
    finally:
        if executor is not None:
            executor.shutdown()

    stages: Dict[str, LabelState] = {}
    with stage_timer("labeling", runtime):
        stages[LabelStage.PATH.value] = path_labels(path, subvalues)
        reliable = reliable_background_ids(path, subvalues)
        background = fit_global_motion(reliable, tracks, config.geometry, config.background)
        stages[LabelStage.GLOBAL.value] = label_all(tracks, background, config.geometry)
        if config.filter.enabled:
            stages[LabelStage.FILTERED.value] = filter_labels(stages[LabelStage.GLOBAL.value], tracks,
                                                              meta, config.filter)

    final = stages[LabelStage.FILTERED.value if config.filter.enabled else LabelStage.GLOBAL.value]
    counts = {
        "trajectories": len(trajs),
        "clips": len(clips),
        "candidates": sum(len(c) for c in candidates),
        "edges": len(graph.edges),
        "fallback": sum(m.origin == ORIGIN_FALLBACK for c in candidates for m in c),
        "reliable": len(reliable),
    }
    flags = assumption_flags(trajs, config.assumptions, bridged=path.bridged)
    runtime["total"] = sum(runtime.values())
    return PipelineResult(dict(final.labels), stages, clips, candidates, graph, path, background,
                          runtime, counts, flags)


def run_baseline(config: PipelineConfig, meta: VideoMeta, trajs: Sequence[Trajectory]) -> PipelineResult:
    """Label by one clip-wide consensus motion per clip, for comparison runs"""
    runtime: Dict[str, float] = {}
    clips, _, tracks = _prepare(config, meta, trajs, runtime)
    with stage_timer("baseline", runtime):
        labels = global_ransac_baseline(clips, tracks, config.geometry, config.ransac)
    runtime["total"] = sum(runtime.values())
    flags = assumption_flags(trajs, config.assumptions)
    return PipelineResult(labels, {}, clips, [], runtime=runtime,
                          counts={"trajectories": len(trajs), "clips": len(clips)}, flags=flags)


def run_file(config: PipelineConfig, input_path: Union[str, Path], baseline: bool = False) -> PipelineResult:
    """Read a trajectory file and run the pipeline on it"""
    meta, trajs = read_trajectories(input_path)
    runner = run_baseline if baseline else run_pipeline
    return runner(config, meta, trajs)
