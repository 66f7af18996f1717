"""
Per-stage trajectory labels
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable


class LabelStage(str, Enum):
    PATH = "path"
    GLOBAL = "global"
    FILTERED = "filtered"


BACKGROUND = 1
FOREGROUND = 0


@dataclass
class LabelState:
    """One label per trajectory: 1 background, 0 non-background"""
    stage: LabelStage
    labels: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.stage = LabelStage(self.stage)
        self.labels = {int(tid): int(bool(value)) for tid, value in self.labels.items()}

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, trajectory_id: int) -> int:
        return self.labels[trajectory_id]

    def background_ids(self) -> FrozenSet[int]:
        return frozenset(tid for tid, value in self.labels.items() if value == BACKGROUND)

    def changed(self, other: "LabelState", ids: Iterable[int] = None) -> int:
        """Number of trajectories whose label differs from `other`"""
        ids = self.labels if ids is None else ids
        return sum(self.labels[tid] != other.labels.get(tid) for tid in ids)
