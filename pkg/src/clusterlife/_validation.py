"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np

from .model import Trajectory, TrajectoryPoint, id_sort_key


def _as_id(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, numbers.Integral) or isinstance(value, str):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return str(value)


def check_trajectories(X, return_keys: bool = False):
    """Coerce ``X`` into a list of :class:`Trajectory` sorted by id.

    ``X`` may be a sequence of trajectories, a DataFrame with columns
    ``traj_id, tick, x, y``, or an array-like of such rows. With
    ``return_keys`` the ``(traj_id, tick)`` of every input reading is also
    returned, in input order.
    """
    if isinstance(X, Sequence) and X and all(isinstance(t, Trajectory) for t in X):
        ids = [t.id for t in X]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate trajectory ids")
        trajs = sorted(X, key=lambda t: id_sort_key(t.id))
        keys = [(t.id, p.tick) for t in X for p in t.points]
        return (trajs, keys) if return_keys else trajs

    if hasattr(X, "columns"):
        missing = {"traj_id", "tick", "x", "y"} - set(X.columns)
        if missing:
            raise ValueError(f"missing column(s): {', '.join(sorted(missing))}")
        rows = X[["traj_id", "tick", "x", "y"]].itertuples(index=False, name=None)
    else:
        arr = np.asarray(X, dtype=object)
        if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] == 0:
            raise ValueError("expected Trajectory objects or rows of (traj_id, tick, x, y)")
        rows = map(tuple, arr)

    grouped: dict = {}
    keys = []
    for tid, tick, x, y in rows:
        tid = _as_id(tid)
        tick_f = float(tick)
        if not tick_f.is_integer():
            raise ValueError(f"tick must be an integer, got {tick!r}")
        point = TrajectoryPoint(float(x), float(y), int(tick_f))
        pts = grouped.setdefault(tid, {})
        if point.tick in pts:
            raise ValueError(f"duplicate reading for trajectory {tid} at tick {point.tick}")
        pts[point.tick] = point
        keys.append((tid, point.tick))
    if not grouped:
        raise ValueError("no trajectory rows")
    trajs = [Trajectory(tid, [pts[t] for t in sorted(pts)])
             for tid, pts in sorted(grouped.items(), key=lambda kv: id_sort_key(kv[0]))]
    return (trajs, keys) if return_keys else trajs
