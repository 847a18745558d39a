"""Density-based clustering of single frames."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .model import AnalysisParams, SampledFrame, TrajectoryPoint

# above this many points neighbourhoods come from a k-d tree instead of a dense matrix
_DENSE_LIMIT = 2048


@dataclass(frozen=True)
class ClusterInstance:
    tick: int
    index: int
    members: frozenset
    centroid: TrajectoryPoint
    valid: bool

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class FrameClustering:
    tick: int
    clusters: tuple[ClusterInstance, ...] = ()
    noise: frozenset = field(default_factory=frozenset)

    @property
    def valid_clusters(self) -> tuple[ClusterInstance, ...]:
        return tuple(c for c in self.clusters if c.valid)


def neighbourhoods(xy: np.ndarray, eps: float) -> list[np.ndarray]:
    """Indices within ``eps`` of each row (the row itself included), ascending."""
    n = len(xy)
    if n == 0:
        return []
    if n <= _DENSE_LIMIT:
        d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
        return [np.flatnonzero(row <= eps) for row in d]
    tree = cKDTree(xy)
    return [np.asarray(sorted(nb), dtype=np.intp) for nb in tree.query_ball_point(xy, eps)]


def dbscan_labels(xy: np.ndarray, eps: float, min_pts: int):
    """DBSCAN over rows of ``xy`` scanned in row order.

    Returns ``(labels, is_core)``; noise is labelled -1. Clusters are numbered by
    the scan position of their first core point and each border point joins the
    lowest-numbered cluster with a core point within ``eps``.
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    n = len(xy)
    labels = np.full(n, -1, dtype=np.intp)
    nbrs = neighbourhoods(xy, eps)
    is_core = np.fromiter((len(nb) >= min_pts for nb in nbrs), dtype=bool, count=n)
    current = 0
    for i in range(n):
        if labels[i] != -1 or not is_core[i]:
            continue
        labels[i] = current
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for k in nbrs[j]:
                if labels[k] == -1:
                    labels[k] = current
                    if is_core[k]:
                        queue.append(k)
        current += 1
    return labels, is_core


def centroid_of(members, frame: SampledFrame) -> TrajectoryPoint:
    if not members:
        raise ValueError("centroid of an empty member set")
    pts = np.array([(frame.positions[m].x, frame.positions[m].y) for m in members])
    cx, cy = pts.mean(axis=0)
    return TrajectoryPoint(float(cx), float(cy), frame.tick)


def cluster_frame(frame: SampledFrame, params: AnalysisParams) -> FrameClustering:
    """Cluster one frame; scan order is ascending trajectory id.

    Small clusters are kept but flagged invalid; :func:`filter_valid` drops them.
    """
    ids = frame.ids()
    if not ids:
        return FrameClustering(frame.tick)
    xy = np.array([(frame.positions[i].x, frame.positions[i].y) for i in ids])
    labels, _ = dbscan_labels(xy, params.eps, params.min_pts)
    groups: dict[int, list] = {}
    for tid, lab in zip(ids, labels):
        groups.setdefault(int(lab), []).append(tid)
    noise = frozenset(groups.pop(-1, ()))
    clusters = tuple(
        ClusterInstance(frame.tick, k, frozenset(m), centroid_of(m, frame),
                        len(m) >= params.min_cluster)
        for k, m in sorted(groups.items())
    )
    return FrameClustering(frame.tick, clusters, noise)


def filter_valid(clustering: FrameClustering, params: AnalysisParams) -> FrameClustering:
    """Demote clusters smaller than ``min_cluster`` to noise, keeping local indices."""
    kept, demoted = [], set(clustering.noise)
    for c in clustering.clusters:
        if len(c.members) >= params.min_cluster:
            kept.append(c)
        else:
            demoted |= c.members
    return FrameClustering(clustering.tick, tuple(kept), frozenset(demoted))


class SnapshotDBSCAN(ClusterMixin, BaseEstimator):
    """DBSCAN on an ``(n, 2)`` array with a reproducible scan order.

    Rows are scanned in the order given, which fixes border-point attachment
    and cluster numbering.

    Parameters
    ----------
    eps : float
        Neighbourhood radius.
    min_pts : int
        Neighbours (self included) required for a core point.
    min_cluster : int
        Clusters smaller than this are relabelled as noise. ``1`` disables it.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    core_sample_indices_ : ndarray
    n_clusters_ : int
    """

    def __init__(self, eps=1.0, min_pts=3, min_cluster=1):
        self.eps = eps
        self.min_pts = min_pts
        self.min_cluster = min_cluster

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=0)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (x, y), got {X.shape[1]}")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")
        labels, is_core = dbscan_labels(X, self.eps, self.min_pts)
        if self.min_cluster > 1 and len(labels):
            sizes = np.bincount(labels[labels >= 0], minlength=labels.max() + 1)
            small = np.flatnonzero(sizes < self.min_cluster)
            labels[np.isin(labels, small)] = -1
        self.labels_ = labels
        self.core_sample_indices_ = np.flatnonzero(is_core)
        self.n_clusters_ = len(set(labels[labels >= 0].tolist()))
        return self

    def fit_predict(self, X, y=None, **kwargs):
        return self.fit(X).labels_

    @property
    def cluster_ids_(self):
        check_is_fitted(self, "labels_")
        return np.unique(self.labels_[self.labels_ >= 0])
