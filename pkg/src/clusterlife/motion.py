"""Stop/move classification of trajectory points and group centroids."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

from .model import AnalysisParams, SampledFrame, TrajectoryPoint, euclidean_distance


class Movement(str, enum.Enum):
    STOP = "stop"
    MOVE = "move"


@dataclass(frozen=True)
class MotionState:
    """Per-entity classifier state.

    ``stop_anchor`` is the start of the most recent stop. ``last_point`` is the
    entity's previous position; group classification re-anchors on it.
    """

    entity: Hashable
    last_movement: Movement = Movement.MOVE
    stop_anchor: TrajectoryPoint | None = None
    last_point: TrajectoryPoint | None = None

    def __post_init__(self):
        if self.last_movement is Movement.STOP and self.stop_anchor is None:
            raise ValueError(f"entity {self.entity!r} is stopped without a stop anchor")


def initial_state(entity, first_point: TrajectoryPoint) -> MotionState:
    """State after an entity's first observation, which is labelled move."""
    return MotionState(entity, Movement.MOVE, None, first_point)


def classify_point(prev_state: MotionState, prev_point: TrajectoryPoint,
                   curr_point: TrajectoryPoint, params: AnalysisParams):
    """Apply the trajectory stop/move rules to one step.

    Stop rules take precedence; they cannot overlap the move rule since
    ``r_e <= r_n``. A step satisfying neither keeps the previous label. An
    entity that has never stopped has no anchor and counts as infinitely far
    from it.
    """
    if curr_point.tick <= prev_point.tick:
        raise ValueError(
            f"entity {prev_state.entity!r}: tick {curr_point.tick} does not follow {prev_point.tick}"
        )
    step = euclidean_distance(curr_point, prev_point)
    anchor = prev_state.stop_anchor
    from_anchor = float("inf") if anchor is None else euclidean_distance(curr_point, anchor)

    if prev_state.last_movement is Movement.MOVE and step <= params.r_e:
        anchor = curr_point
        label = Movement.STOP
    elif prev_state.last_movement is Movement.STOP and from_anchor <= params.r_e:
        label = Movement.STOP
    elif from_anchor > params.r_n and step > params.r_e:
        label = Movement.MOVE
    else:
        label = prev_state.last_movement
    return label, MotionState(prev_state.entity, label, anchor, curr_point)


def classify_group(prev_state: MotionState, curr_centroid: TrajectoryPoint,
                   params: AnalysisParams):
    """Stop iff the centroid lies within ``r_g_error`` of the group's stop anchor.

    While moving, the anchor trails the latest centroid, so a subsequent stop
    is anchored where it began.
    """
    if prev_state.last_point is not None and curr_centroid.tick <= prev_state.last_point.tick:
        raise ValueError(
            f"group {prev_state.entity!r}: tick {curr_centroid.tick} does not follow "
            f"{prev_state.last_point.tick}"
        )
    anchor = prev_state.stop_anchor or prev_state.last_point or curr_centroid
    if euclidean_distance(curr_centroid, anchor) <= params.r_g_error:
        return Movement.STOP, MotionState(prev_state.entity, Movement.STOP, anchor, curr_centroid)
    return Movement.MOVE, MotionState(prev_state.entity, Movement.MOVE, curr_centroid, curr_centroid)


def new_group_state(entity, first_centroid: TrajectoryPoint) -> MotionState:
    return MotionState(entity, Movement.MOVE, first_centroid, first_centroid)


def label_trajectories(frames: Iterable[SampledFrame], params: AnalysisParams
                       ) -> dict[int, Mapping[Hashable, Movement]]:
    """Movement label of every trajectory present in every frame.

    Readings are re-stamped with their frame tick, so a reading reused by two
    frames counts as zero displacement.
    """
    states: dict = {}
    labels = {}
    for frame in frames:
        at_tick = {}
        for tid in frame.ids():
            src = frame.positions[tid]
            point = TrajectoryPoint(src.x, src.y, frame.tick)
            state = states.get(tid)
            if state is None:
                state = initial_state(tid, point)
                label = state.last_movement
            else:
                label, state = classify_point(state, state.last_point, point, params)
            states[tid] = state
            at_tick[tid] = label
        labels[frame.tick] = at_tick
    return labels
