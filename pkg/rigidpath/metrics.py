"""
Trajectory-level precision, recall and F-score against ground truth
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from loguru import logger


@dataclass(frozen=True)
class ClassScores:
    """Scores of one class; background is the positive class unless stated otherwise"""
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f_score(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


def confusion(labels: Mapping[int, int], truth: Mapping[int, int], positive: int = 1) -> ClassScores:
    """
    Count true/false positives and false negatives over the ground-truth ids

    Ids without a predicted label count as predicted 0.
    """
    tp = fp = fn = 0
    for tid, actual in truth.items():
        predicted = labels.get(tid, 0)
        hit_pred = int(predicted) == positive
        hit_true = int(actual) == positive
        tp += hit_pred and hit_true
        fp += hit_pred and not hit_true
        fn += hit_true and not hit_pred
    return ClassScores(tp, fp, fn)


@dataclass
class MetricsReport:
    """Scores of the final labels, per-stage variants, timings and pipeline counts"""
    background: ClassScores
    foreground: ClassScores
    stages: Dict[str, ClassScores] = field(default_factory=dict)
    runtime: Dict[str, float] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return self.background.precision

    @property
    def recall(self) -> float:
        return self.background.recall

    @property
    def f_score(self) -> float:
        return self.background.f_score

    def to_flat(self) -> Dict[str, Any]:
        """Flat mapping written as the metrics JSON"""
        flat: Dict[str, Any] = {
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "fg_precision": self.foreground.precision,
            "fg_recall": self.foreground.recall,
            "fg_f_score": self.foreground.f_score,
        }
        for stage, scores in self.stages.items():
            flat[f"{stage}_precision"] = scores.precision
            flat[f"{stage}_recall"] = scores.recall
            flat[f"{stage}_f_score"] = scores.f_score
        for stage, seconds in self.runtime.items():
            flat[f"runtime_{stage}"] = seconds
        for name, value in self.counts.items():
            flat[f"n_{name}"] = value
        flat["flags"] = list(self.flags)
        return flat


def evaluate(labels: Mapping[int, int], ground_truth: Mapping[int, int],
             stages: Mapping[str, Mapping[int, int]] = None) -> MetricsReport:
    """
    Score predicted labels against ground truth

    Args:
        labels: Final labels, 1 for background
        ground_truth: True labels, 1 for background
        stages: Optional labels of intermediate stages

    Returns:
        MetricsReport with background- and foreground-class scores
    """
    missing = [tid for tid in ground_truth if tid not in labels]
    if missing:
        logger.warning(f"{len(missing)} ground-truth trajectories have no predicted label")
    labels = {tid: int(labels.get(tid, 0)) for tid in ground_truth}

    stage_scores = {name: confusion(stage_labels, ground_truth)
                    for name, stage_labels in (stages or {}).items()}
    report = MetricsReport(
        background=confusion(labels, ground_truth, positive=1),
        foreground=confusion({tid: 1 - int(v) for tid, v in labels.items()},
                             {tid: 1 - int(v) for tid, v in ground_truth.items()}, positive=1),
        stages=stage_scores,
    )
    logger.info(f"Background precision {report.precision:.4f}, recall {report.recall:.4f}, "
                f"F {report.f_score:.4f}")
    return report


def write_metrics(path: Union[str, Path], report: MetricsReport) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_flat(), f, indent=2, sort_keys=True)
    logger.info(f"Wrote metrics to {path}")
    return path
