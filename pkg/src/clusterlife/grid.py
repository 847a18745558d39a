"""Grid-partitioned execution of the lifecycle pipeline.

Space is cut into square cells. Each cell clusters its own points plus a halo
of replicated neighbours and keeps only the clusters whose centroid it owns;
cells then run the tracker independently. Straddling clusters are not stitched
back together; the border report counts the clusters whose neighbourhood
reached past what their cell could see.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .lifecycle import LifecycleEvent, track
from .model import AnalysisParams, SampledFrame
from .motion import label_trajectories
from .pipeline import AnalysisResult, build_result, run_sequential
from .snapshot import FrameClustering, cluster_frame, filter_valid


class PartitioningDisabled(ValueError):
    """Raised when a partition is requested with ``grid_cell <= 0``."""


@dataclass(frozen=True, order=True)
class GridCell:
    cx: int
    cy: int
    size: float
    halo: float = 0.0

    @property
    def owned_bounds(self):
        """``(xmin, ymin, xmax, ymax)``, half-open on the max side."""
        return (self.cx * self.size, self.cy * self.size,
                (self.cx + 1) * self.size, (self.cy + 1) * self.size)

    @property
    def halo_bounds(self):
        x0, y0, x1, y1 = self.owned_bounds
        return (x0 - self.halo, y0 - self.halo, x1 + self.halo, y1 + self.halo)

    @property
    def label(self) -> str:
        return f"g{self.cx}_{self.cy}"


def owner(x: float, y: float, size: float) -> tuple[int, int]:
    return math.floor(x / size), math.floor(y / size)


def _halo_span(v: float, size: float, halo: float) -> range:
    return range(math.floor((v - halo) / size), math.floor((v + halo) / size) + 1)


def partition(frames: Sequence[SampledFrame], params: AnalysisParams
              ) -> dict[GridCell, list[SampledFrame]]:
    """Split every frame by owning cell, replicating readings into neighbour halos.

    Only cells that own at least one reading somewhere in the run are
    returned; each gets a frame for every input tick.
    """
    size, halo = params.grid_cell, params.halo
    if size <= 0:
        raise PartitioningDisabled("grid_cell must be > 0 to partition")
    owners = {owner(p.x, p.y, size) for f in frames for p in f.positions.values()}
    cells = {key: GridCell(key[0], key[1], size, halo) for key in owners}
    out = {cell: [] for cell in cells.values()}
    for frame in frames:
        per_cell: dict[tuple, dict] = {key: {} for key in cells}
        for tid in frame.ids():
            p = frame.positions[tid]
            for cx in _halo_span(p.x, size, halo):
                for cy in _halo_span(p.y, size, halo):
                    if (cx, cy) in per_cell:
                        per_cell[(cx, cy)][tid] = p
        for key, cell in cells.items():
            out[cell].append(SampledFrame(frame.tick, per_cell[key]))
    return dict(sorted(out.items()))


def _cell_clusterings(cell: GridCell, frames, params):
    result = []
    for frame in frames:
        clustering = filter_valid(cluster_frame(frame, params), params)
        own = tuple(c for c in clustering.clusters
                    if owner(c.centroid.x, c.centroid.y, cell.size) == (cell.cx, cell.cy))
        result.append(FrameClustering(clustering.tick, own, clustering.noise))
    return result


def _run_cell(cell: GridCell, frames, params, labels):
    clusterings = _cell_clusterings(cell, frames, params)
    events, lifecycles = track(clusterings, params, labels, id_prefix=f"{cell.label}.c")
    return cell, events, lifecycles, clusterings


def _truncated(members_xy: np.ndarray, outside_xy: np.ndarray, eps: float) -> bool:
    if not len(outside_xy):
        return False
    lo, hi = members_xy.min(axis=0) - eps, members_xy.max(axis=0) + eps
    near = outside_xy[np.all((outside_xy >= lo) & (outside_xy <= hi), axis=1)]
    if not len(near):
        return False
    d = np.hypot(members_xy[:, None, 0] - near[None, :, 0], members_xy[:, None, 1] - near[None, :, 1])
    return bool((d <= eps).any())


def border_report(frames: Sequence[SampledFrame],
                  cell_frames: Mapping[GridCell, Sequence[SampledFrame]],
                  cell_clusterings: Mapping[GridCell, Sequence[FrameClustering]],
                  eps: float) -> dict[int, int]:
    """Per tick, the clusters with a reading invisible to their cell within ``eps``
    of a member, i.e. whose density neighbourhood was cut by the cell border."""
    report = {f.tick: 0 for f in frames}
    by_tick = {f.tick: f for f in frames}
    for cell, clusterings in cell_clusterings.items():
        for local, clustering in zip(cell_frames[cell], clusterings):
            if not clustering.clusters:
                continue
            full = by_tick[clustering.tick]
            outside = np.array([(p.x, p.y) for tid, p in full.positions.items()
                                if tid not in local.positions]).reshape(-1, 2)
            for c in clustering.clusters:
                xy = np.array([(local.positions[m].x, local.positions[m].y) for m in c.members])
                if _truncated(xy, outside, eps):
                    report[clustering.tick] += 1
    return report


def run_partitioned(frames: Sequence[SampledFrame], params: AnalysisParams,
                    workers: int = 1) -> AnalysisResult:
    """Run the pipeline per grid cell on up to ``workers`` processes.

    Output does not depend on ``workers`` or completion order: cell results
    are merged in cell order and re-sorted canonically. With ``grid_cell == 0``
    this is the plain sequential pipeline.
    """
    if params.grid_cell <= 0:
        return run_sequential(frames, params)
    labels = label_trajectories(frames, params)
    parts = partition(frames, params)
    jobs = [(cell, cell_frames, params, labels) for cell, cell_frames in parts.items()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_cell, *zip(*jobs)))
    else:
        results = [_run_cell(*job) for job in jobs]
    results.sort(key=lambda r: r[0])

    events: list[LifecycleEvent] = []
    lifecycles = []
    for _, cell_events, cell_lifecycles, _ in results:
        events.extend(cell_events)
        lifecycles.extend(cell_lifecycles)
    events.sort(key=LifecycleEvent.sort_key)
    lifecycles.sort(key=lambda lc: (lc.birth, lc.identity))
    report = border_report(frames, parts, {r[0]: r[3] for r in results}, params.eps)
    return build_result(params, [f.tick for f in frames], events, lifecycles, report)
