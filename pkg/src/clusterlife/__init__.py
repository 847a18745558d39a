"""Cluster lifecycle analysis for moving-object trajectories."""

from .estimator import ClusterLifecycleAnalyzer, analyze
from .grid import GridCell, partition, run_partitioned
from .lifecycle import (
    CandidateTable,
    ClusterLifecycle,
    EventKind,
    LifecycleEvent,
    assemble_lifecycles,
    build_candidate_tables,
    detect_events,
    resolve_identities,
    same_cluster,
)
from .model import AnalysisParams, SampledFrame, Trajectory, TrajectoryPoint, euclidean_distance, resample
from .motion import MotionState, Movement, classify_group, classify_point
from .pipeline import AnalysisResult
from .scenarios import GroundTruth, ScenarioSpec, generate, score
from .snapshot import ClusterInstance, FrameClustering, SnapshotDBSCAN, centroid_of, cluster_frame, filter_valid
from .stats import lifecycle_statistics

__version__ = "0.1.0"
