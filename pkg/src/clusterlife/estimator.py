"""scikit-learn style front end for the full lifecycle analysis."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_trajectories
from .grid import run_partitioned
from .model import AnalysisParams, resample
from .pipeline import AnalysisResult

_REQUIRED = ("eps", "r_e", "r_n", "r_g_error", "max_dist_centroid")


def analyze(trajectories, params: AnalysisParams, workers: int = 1) -> AnalysisResult:
    """Resample, cluster, track and summarise; grid-partitioned when ``params.grid_cell > 0``."""
    frames = resample(trajectories, params)
    return run_partitioned(frames, params, workers)


class ClusterLifecycleAnalyzer(BaseEstimator):
    """Track cluster lifecycles in a set of trajectories.

    Parameters
    ----------
    eps, r_e, r_n, r_g_error, max_dist_centroid : float
        Length-scale parameters; they depend on the data's units and must be
        given explicitly.
    min_pts, min_cluster : int, default=3
    min_shared : float, default=0.5
        Fraction of shared members, on both sides, needed for two clusters at
        consecutive ticks to be one identity.
    partial_shared : float, default=0.25
        Fraction of a cluster's members a merge/split contributor must share.
    interval : int, default=1
        Spacing of the universal tick grid.
    staleness_window : int, optional
        Defaults to ``interval``.
    grid_cell : float, default=0
        Grid cell edge; 0 disables partitioning.
    halo : float, optional
        Halo width of grid cells; defaults to ``2 * eps``.
    n_workers : int, default=1
        Worker processes for the partitioned run.

    Attributes
    ----------
    params_ : AnalysisParams
    result_ : AnalysisResult
    lifecycles_ : list of ClusterLifecycle
    events_ : list of LifecycleEvent
    statistics_ : dict
    border_report_ : dict
        Per-tick count of clusters cut by a grid border (empty without a grid).
    labels_ : ndarray of object
        Cluster identity of every input reading, ``None`` for noise or for
        readings no frame selected. Aligned with the input rows.
    """

    def __init__(self, eps=None, r_e=None, r_n=None, r_g_error=None, max_dist_centroid=None,
                 min_pts=3, min_cluster=3, min_shared=0.5, partial_shared=0.25, interval=1,
                 staleness_window=None, grid_cell=0.0, halo=None, n_workers=1):
        self.eps = eps
        self.r_e = r_e
        self.r_n = r_n
        self.r_g_error = r_g_error
        self.max_dist_centroid = max_dist_centroid
        self.min_pts = min_pts
        self.min_cluster = min_cluster
        self.min_shared = min_shared
        self.partial_shared = partial_shared
        self.interval = interval
        self.staleness_window = staleness_window
        self.grid_cell = grid_cell
        self.halo = halo
        self.n_workers = n_workers

    def _make_params(self) -> AnalysisParams:
        values = self.get_params()
        workers = values.pop("n_workers")
        if not isinstance(workers, (int, np.integer)) or workers < 1:
            raise ValueError(f"n_workers must be a positive integer, got {workers!r}")
        missing = [k for k in _REQUIRED if values[k] is None]
        if missing:
            raise ValueError(f"{', '.join(missing)} must be set; they depend on the data's scale")
        return AnalysisParams(**values)

    def fit(self, X, y=None):
        trajectories, keys = check_trajectories(X, return_keys=True)
        self.params_ = self._make_params()
        frames = resample(trajectories, self.params_)
        self.result_ = run_partitioned(frames, self.params_, self.n_workers)
        self.lifecycles_ = self.result_.lifecycles
        self.events_ = self.result_.events
        self.statistics_ = self.result_.statistics
        self.border_report_ = self.result_.border_report

        member_of = {}
        for lc in self.lifecycles_:
            for tick, members in lc.members.items():
                for tid in members:
                    member_of[(tid, tick)] = lc.identity
        reading = {}
        for frame in frames:
            for tid, p in frame.positions.items():
                reading.setdefault((tid, p.tick), member_of.get((tid, frame.tick)))
        self.labels_ = np.array([reading.get(k) for k in keys], dtype=object)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    @property
    def n_identities_(self) -> int:
        check_is_fitted(self, "lifecycles_")
        return len(self.lifecycles_)
