"""Shared data model: points, trajectories, parameters and universal-tick resampling."""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

TrajectoryId = Hashable


class NoDataError(ValueError):
    """Raised when an operation receives no trajectory data at all."""


def id_sort_key(ident):
    """Total order over mixed int/str identifiers (ints first, numerically)."""
    if isinstance(ident, int):
        return (0, ident, "")
    return (1, 0, str(ident))


@dataclass(frozen=True)
class TrajectoryPoint:
    x: float
    y: float
    tick: int

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")
        if isinstance(self.tick, bool) or not isinstance(self.tick, int):
            raise TypeError(f"tick must be an int, got {type(self.tick).__name__}")
        if self.tick < 0:
            raise ValueError(f"tick must be non-negative, got {self.tick}")


@dataclass(frozen=True)
class Trajectory:
    id: TrajectoryId
    points: tuple[TrajectoryPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError(f"trajectory {self.id!r} has no points")
        ticks = [p.tick for p in self.points]
        for a, b in zip(ticks, ticks[1:]):
            if b <= a:
                raise ValueError(
                    f"trajectory {self.id!r}: ticks must be strictly increasing "
                    f"(got {a} then {b})"
                )

    def __len__(self):
        return len(self.points)

    @property
    def ticks(self) -> list[int]:
        return [p.tick for p in self.points]


@dataclass(frozen=True)
class AnalysisParams:
    """Every tunable of the lifecycle analysis.

    Scale-bound radii (``r_e``, ``r_n``, ``r_g_error``, ``eps``,
    ``max_dist_centroid``) have no defaults. ``staleness_window`` defaults to
    ``interval`` and ``halo`` to ``2 * eps``.
    """

    r_e: float
    r_n: float
    r_g_error: float
    eps: float
    max_dist_centroid: float
    min_pts: int = 3
    min_cluster: int = 3
    min_shared: float = 0.5
    partial_shared: float = 0.25
    interval: int = 1
    staleness_window: int | None = None
    grid_cell: float = 0.0
    halo: float | None = None

    def __post_init__(self):
        if self.staleness_window is None:
            object.__setattr__(self, "staleness_window", self.interval)
        if self.halo is None:
            object.__setattr__(self, "halo", 2.0 * self.eps)
        _check_params(self)


def _check_params(p: AnalysisParams) -> None:
    for name in ("r_e", "r_n", "r_g_error", "eps", "max_dist_centroid", "min_shared",
                 "partial_shared", "grid_cell", "halo"):
        v = getattr(p, name)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"{name} must be a finite number, got {v!r}")
    for name in ("min_pts", "min_cluster", "interval", "staleness_window"):
        v = getattr(p, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"{name} must be an integer, got {v!r}")
    if not 0 < p.r_e <= p.r_n:
        raise ValueError(f"need 0 < r_e <= r_n, got r_e={p.r_e}, r_n={p.r_n}")
    if p.r_g_error <= 0:
        raise ValueError("r_g_error must be > 0")
    if p.eps <= 0:
        raise ValueError("eps must be > 0")
    if p.min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    if p.min_cluster < 2:
        raise ValueError("min_cluster must be >= 2")
    if not 0 < p.min_shared < 1:
        raise ValueError("min_shared must lie in (0, 1)")
    if not 0 < p.partial_shared < 1:
        raise ValueError("partial_shared must lie in (0, 1)")
    if p.interval < 1:
        raise ValueError("interval must be >= 1")
    if p.staleness_window < 1:
        raise ValueError("staleness_window must be >= 1")
    if p.max_dist_centroid <= 0:
        raise ValueError("max_dist_centroid must be > 0")
    if p.grid_cell < 0:
        raise ValueError("grid_cell must be >= 0")
    if p.halo < 0:
        raise ValueError("halo must be >= 0")


@dataclass(frozen=True)
class SampledFrame:
    """Positions of every trajectory with a usable reading at one universal tick.

    Positions keep the tick of the source reading, which may lie up to
    ``staleness_window - 1`` ticks after the frame tick.
    """

    tick: int
    positions: Mapping[TrajectoryId, TrajectoryPoint] = field(default_factory=dict)

    def ids(self) -> list:
        return sorted(self.positions, key=id_sort_key)

    def __len__(self):
        return len(self.positions)


def euclidean_distance(a: TrajectoryPoint, b: TrajectoryPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def universal_ticks(first: int, last: int, interval: int) -> range:
    return range(first, first + ((last - first) // interval) * interval + 1, interval)


def resample(trajectories: Sequence[Trajectory], params: AnalysisParams) -> list[SampledFrame]:
    """Align trajectories onto the universal tick grid.

    At universal tick ``u`` a trajectory contributes its earliest reading with
    ``u <= tick < u + staleness_window``; without one it is absent from the
    frame. No coordinates are interpolated.
    """
    if not trajectories:
        raise NoDataError("no trajectories to resample")
    first = min(t.points[0].tick for t in trajectories)
    last = max(t.points[-1].tick for t in trajectories)
    grid = universal_ticks(first, last, params.interval)
    positions = {u: {} for u in grid}
    window = params.staleness_window
    for traj in sorted(trajectories, key=lambda t: id_sort_key(t.id)):
        ticks = traj.ticks
        lo = max(first, ticks[0] - window + 1)
        k0 = -(-(lo - first) // params.interval)
        for u in grid[k0:]:
            if u > ticks[-1]:
                break
            i = bisect_left(ticks, u)
            if i < len(ticks) and ticks[i] - u < window:
                positions[u][traj.id] = traj.points[i]
    return [SampledFrame(u, positions[u]) for u in grid]
