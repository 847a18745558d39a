"""Summary statistics over assembled lifecycles."""

from __future__ import annotations

from collections import Counter
from statistics import fmean
from typing import Sequence

from .lifecycle import ClusterLifecycle, EventKind


def _summary(values):
    if not values:
        return {"count": 0, "min": 0.0, "mean": 0.0, "max": 0.0}
    return {"count": len(values), "min": float(min(values)), "mean": fmean(values),
            "max": float(max(values))}


def member_persistence(lifecycle: ClusterLifecycle) -> dict:
    """Fraction of the lifecycle's populated ticks each trajectory was a member."""
    populated = [m for m in lifecycle.members.values() if m]
    if not populated:
        return {}
    counts = Counter(tid for m in populated for tid in m)
    return {tid: n / len(populated) for tid, n in counts.items()}


def lifecycle_statistics(lifecycles: Sequence[ClusterLifecycle], horizon: int,
                         start_tick: int = 0) -> dict:
    """Answer the lifecycle question catalogue for one analysis run.

    ``horizon`` is the observed span in ticks, starting at ``start_tick``.
    Lifetimes are ``death - birth``; clusters still alive are right-censored at
    ``start_tick + horizon`` and summarised separately.
    """
    horizon_end = start_tick + horizon
    completed = [lc.lifetime() for lc in lifecycles if not lc.alive]
    censored = [lc.lifetime(horizon_end) for lc in lifecycles if lc.alive]

    sizes = []
    for lc in lifecycles:
        populated = [len(m) for m in lc.members.values() if m]
        if populated:
            sizes.append(fmean(populated))

    kinds = Counter(ev.kind for lc in lifecycles for ev in lc.events)
    event_counts = {kind.value: kinds.get(kind, 0) for kind in EventKind}

    persistence = [v for lc in lifecycles for v in member_persistence(lc).values()]

    return {
        "cluster_count": len(lifecycles),
        "alive_at_horizon": len(censored),
        "lifetime": _summary(completed),
        "censored_lifetime": _summary(censored),
        "mean_size": _summary(sizes),
        "event_counts": event_counts,
        "formation_rate": event_counts["start"] / horizon if horizon > 0 else 0.0,
        "disappearance_rate": event_counts["end"] / horizon if horizon > 0 else 0.0,
        "member_persistence": fmean(persistence) if persistence else 0.0,
        "horizon": horizon,
        "start_tick": start_tick,
    }
