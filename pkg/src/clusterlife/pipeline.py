"""Sequential frame-to-lifecycle pipeline shared by the plain and gridded runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .lifecycle import ClusterLifecycle, LifecycleEvent, track
from .model import AnalysisParams, SampledFrame
from .motion import label_trajectories
from .snapshot import FrameClustering, cluster_frame, filter_valid
from .stats import lifecycle_statistics


@dataclass
class AnalysisResult:
    params: AnalysisParams
    ticks: list[int]
    events: list[LifecycleEvent]
    lifecycles: list[ClusterLifecycle]
    statistics: dict
    border_report: dict[int, int] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.ticks) * self.params.interval

    @property
    def start_tick(self) -> int:
        return self.ticks[0] if self.ticks else 0


def cluster_frames(frames: Sequence[SampledFrame], params: AnalysisParams) -> list[FrameClustering]:
    return [filter_valid(cluster_frame(f, params), params) for f in frames]


def run_sequential(frames: Sequence[SampledFrame], params: AnalysisParams,
                   trajectory_labels=None) -> AnalysisResult:
    if trajectory_labels is None:
        trajectory_labels = label_trajectories(frames, params)
    events, lifecycles = track(cluster_frames(frames, params), params, trajectory_labels)
    return build_result(params, [f.tick for f in frames], events, lifecycles)


def build_result(params, ticks, events, lifecycles, border_report=None) -> AnalysisResult:
    horizon = len(ticks) * params.interval
    start = ticks[0] if ticks else 0
    stats = lifecycle_statistics(lifecycles, horizon, start)
    if border_report is not None:
        stats["border_clusters"] = sum(border_report.values())
    return AnalysisResult(params, list(ticks), events, lifecycles, stats, border_report or {})
