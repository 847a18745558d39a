"""Cluster identity threading, lifecycle event detection and lifecycle assembly."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .model import AnalysisParams, euclidean_distance, id_sort_key
from .motion import Movement, MotionState, classify_group, new_group_state
from .snapshot import ClusterInstance, FrameClustering


class EventKind(str, enum.Enum):
    START = "start"
    ENTER = "enter"
    LEAVE = "leave"
    MERGE = "merge"
    SPLIT = "split"
    END = "end"


# within one tick, a lifecycle opens with Start and closes with End
KIND_ORDER = {kind: rank for rank, kind in enumerate(EventKind)}


class Direction(str, enum.Enum):
    PREV_TO_CURR = "prev_to_curr"
    CURR_TO_PREV = "curr_to_prev"


@dataclass(frozen=True)
class LifecycleEvent:
    kind: EventKind
    tick: int
    subject: str
    participants: tuple = ()
    subject_movement: Movement | None = None
    participant_movements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "participants", tuple(self.participants))
        object.__setattr__(self, "participant_movements", tuple(self.participant_movements))
        n = len(self.participants)
        if self.kind in (EventKind.ENTER, EventKind.LEAVE) and n < 1:
            raise ValueError(f"{self.kind.value} event needs at least one trajectory")
        if self.kind in (EventKind.MERGE, EventKind.SPLIT) and len(set(self.participants)) < 2:
            raise ValueError(f"{self.kind.value} event needs two distinct clusters")
        if self.kind in (EventKind.START, EventKind.END) and n:
            raise ValueError(f"{self.kind.value} event takes no participants")

    def sort_key(self):
        return (self.tick, KIND_ORDER[self.kind], id_sort_key(self.subject),
                tuple(id_sort_key(p) for p in self.participants))


@dataclass(frozen=True)
class CandidateLink:
    """One value of a candidate table entry."""

    cluster: ClusterInstance
    shared: int
    distance: float
    same: bool
    partial: bool


@dataclass(frozen=True)
class CandidateTable:
    direction: Direction
    entries: Mapping[ClusterInstance, tuple[CandidateLink, ...]]

    def partial_links(self, key: ClusterInstance) -> list[CandidateLink]:
        return [link for link in self.entries.get(key, ()) if link.partial]


@dataclass
class ClusterLifecycle:
    identity: str
    birth: int
    death: int | None
    members: dict[int, frozenset]
    events: tuple[LifecycleEvent, ...]

    @property
    def alive(self) -> bool:
        return self.death is None

    def lifetime(self, horizon_end: int | None = None) -> int | None:
        end = self.death if self.death is not None else horizon_end
        return None if end is None else end - self.birth


def same_cluster(c1, c2, min_shared: float) -> bool:
    """Mutual shared-membership test: both sides share strictly more than
    ``min_shared`` of their members. Accepts clusters or plain sets."""
    m1 = c1.members if isinstance(c1, ClusterInstance) else c1
    m2 = c2.members if isinstance(c2, ClusterInstance) else c2
    shared = len(m1 & m2)
    return shared > min_shared * len(m1) and shared > min_shared * len(m2)


def _table(direction, keys, values, params):
    entries = {}
    for key in keys:
        links = []
        for other in values:
            d = euclidean_distance(key.centroid, other.centroid)
            if d >= params.max_dist_centroid:
                continue
            shared = len(key.members & other.members)
            links.append(CandidateLink(
                cluster=other,
                shared=shared,
                distance=d,
                same=same_cluster(key, other, params.min_shared),
                partial=other.valid and shared >= params.partial_shared * len(key.members),
            ))
        entries[key] = tuple(links)
    return CandidateTable(direction, entries)


def build_candidate_tables(prev: FrameClustering, curr: FrameClustering,
                           params: AnalysisParams) -> tuple[CandidateTable, CandidateTable]:
    """Forward (prev keys) and backward (curr keys) candidate tables.

    Only valid clusters take part, and a pair is compared only when its
    centroids are strictly closer than ``max_dist_centroid``.
    """
    if prev.tick >= curr.tick:
        raise ValueError(f"frames out of order: {prev.tick} then {curr.tick}")
    p, c = prev.valid_clusters, curr.valid_clusters
    return (_table(Direction.PREV_TO_CURR, p, c, params),
            _table(Direction.CURR_TO_PREV, c, p, params))


@dataclass
class IdentityAssignment:
    """Identity of every current cluster (by local index) plus the threading."""

    identities: dict[int, str]
    continued: dict[int, int]  # prev index -> curr index
    fresh: tuple[int, ...]
    ended: tuple[int, ...]  # prev indices without continuation


def counter_ids(prefix: str = "c") -> Callable[[], str]:
    counter = itertools.count()
    return lambda: f"{prefix}{next(counter)}"


def resolve_identities(tables: tuple[CandidateTable, CandidateTable],
                       prev_identity_map: Mapping[int, str],
                       new_id: Callable[[], str] | None = None) -> IdentityAssignment:
    """Thread identities from the previous frame into the current one.

    Same-matched pairs are taken greedily by most shared members, then nearest
    centroids, then lowest local indices; each cluster is used at most once.
    Unmatched current clusters get identities from ``new_id`` in local-index
    order.
    """
    forward, backward = tables
    new_id = new_id or counter_ids()
    pairs = [
        (-link.shared, link.distance, link.cluster.index, key.index)
        for key, links in forward.entries.items()
        for link in links if link.same
    ]
    continued: dict[int, int] = {}
    taken: set[int] = set()
    for _, _, ci, pi in sorted(pairs):
        if pi in continued or ci in taken:
            continue
        continued[pi] = ci
        taken.add(ci)

    identities = {ci: prev_identity_map[pi] for pi, ci in continued.items()}
    fresh = []
    for c in sorted(backward.entries, key=lambda c: c.index):
        if c.index not in identities:
            identities[c.index] = new_id()
            fresh.append(c.index)
    ended = tuple(sorted(k.index for k in forward.entries if k.index not in continued))
    return IdentityAssignment(identities, continued, tuple(fresh), ended)


def detect_events(tables: tuple[CandidateTable, CandidateTable],
                  assignment: IdentityAssignment,
                  prev_identity_map: Mapping[int, str],
                  tick: int,
                  group_labels: Mapping[str, Movement] | None = None,
                  trajectory_labels: Mapping[Hashable, Movement] | None = None,
                  ) -> list[LifecycleEvent]:
    """Relations between two consecutive frames.

    Every fresh identity opens with Start and every identity without a
    continuation closes with End; Merge and Split need at least two partial
    contributors. Enter and Leave compare a threaded identity's members across
    the two frames, ignoring trajectories carried by a merging predecessor or a
    splitting successor. Movement labels are attached, never used as gates.
    """
    forward, backward = tables
    group_labels = group_labels or {}
    trajectory_labels = trajectory_labels or {}
    curr_by_index = {c.index: c for c in backward.entries}
    prev_by_index = {p.index: p for p in forward.entries}
    cid = assignment.identities

    def cluster_event(kind, subject, participants=()):
        return LifecycleEvent(kind, tick, subject, participants, group_labels.get(subject),
                              tuple(group_labels.get(p) for p in participants))

    def member_event(kind, subject, tid):
        return LifecycleEvent(kind, tick, subject, (tid,), group_labels.get(subject),
                              (trajectory_labels.get(tid),))

    events = []
    for ci in assignment.fresh:
        events.append(cluster_event(EventKind.START, cid[ci]))
    for pi in assignment.ended:
        events.append(cluster_event(EventKind.END, prev_identity_map[pi]))

    arriving: dict[int, set] = {}
    for c, links in backward.entries.items():
        contributors = [l for l in links if l.partial]
        if len(contributors) < 2:
            continue
        ids = sorted({prev_identity_map[l.cluster.index] for l in contributors}, key=id_sort_key)
        events.append(cluster_event(EventKind.MERGE, cid[c.index], tuple(ids)))
        arriving[c.index] = set().union(*(l.cluster.members for l in contributors))

    departing: dict[int, set] = {}
    for p, links in forward.entries.items():
        contributors = [l for l in links if l.partial]
        if len(contributors) < 2:
            continue
        ids = sorted({cid[l.cluster.index] for l in contributors}, key=id_sort_key)
        events.append(cluster_event(EventKind.SPLIT, prev_identity_map[p.index], tuple(ids)))
        departing[p.index] = set().union(*(l.cluster.members for l in contributors))

    for pi, ci in assignment.continued.items():
        before, after = prev_by_index[pi].members, curr_by_index[ci].members
        subject = cid[ci]
        for tid in sorted(after - before - arriving.get(ci, set()), key=id_sort_key):
            events.append(member_event(EventKind.ENTER, subject, tid))
        for tid in sorted(before - after - departing.get(pi, set()), key=id_sort_key):
            events.append(member_event(EventKind.LEAVE, subject, tid))

    events.sort(key=LifecycleEvent.sort_key)
    return events


def assemble_lifecycles(events: Iterable[LifecycleEvent],
                        memberships: Mapping[str, Mapping[int, frozenset]]
                        ) -> list[ClusterLifecycle]:
    """Group a tick-ordered event stream into one lifecycle per identity.

    ``memberships`` maps identity to its member set per tick; identities
    without an End event are alive at the horizon.
    """
    grouped: dict[str, list[LifecycleEvent]] = {}
    last_tick = None
    for ev in events:
        if last_tick is not None and ev.tick < last_tick:
            raise ValueError(f"event stream out of tick order at tick {ev.tick} (after {last_tick})")
        last_tick = ev.tick
        grouped.setdefault(ev.subject, []).append(ev)

    lifecycles = []
    for ident, evs in grouped.items():
        evs.sort(key=LifecycleEvent.sort_key)
        if evs[0].kind is not EventKind.START:
            raise ValueError(f"lifecycle {ident!r} does not open with a start event")
        birth = evs[0].tick
        death = evs[-1].tick if evs[-1].kind is EventKind.END else None
        members = dict(sorted(memberships.get(ident, {}).items()))
        if death is not None:
            members[death] = frozenset()
        lifecycles.append(ClusterLifecycle(ident, birth, death, members, tuple(evs)))
    lifecycles.sort(key=lambda lc: (lc.birth, id_sort_key(lc.identity)))
    return lifecycles


@dataclass
class LifecycleTracker:
    """Sequential engine advancing identity state one frame at a time."""

    params: AnalysisParams
    id_prefix: str = "c"
    events: list[LifecycleEvent] = field(default_factory=list)
    memberships: dict[str, dict[int, frozenset]] = field(default_factory=dict)

    def __post_init__(self):
        self._new_id = counter_ids(self.id_prefix)
        self._prev: FrameClustering | None = None
        self._prev_ids: dict[int, str] = {}
        self._motion: dict[str, MotionState] = {}

    def update(self, clustering: FrameClustering,
               trajectory_labels: Mapping[Hashable, Movement] | None = None
               ) -> list[LifecycleEvent]:
        prev = self._prev or FrameClustering(clustering.tick - 1)
        tables = build_candidate_tables(prev, clustering, self.params)
        assignment = resolve_identities(tables, self._prev_ids, self._new_id)

        group_labels = {}
        for c in clustering.valid_clusters:
            ident = assignment.identities[c.index]
            state = self._motion.get(ident)
            if state is None:
                state = new_group_state(ident, c.centroid)
                label = state.last_movement
            else:
                label, state = classify_group(state, c.centroid, self.params)
            self._motion[ident] = state
            group_labels[ident] = label
            self.memberships.setdefault(ident, {})[clustering.tick] = c.members
        for pi in assignment.ended:
            ident = self._prev_ids[pi]
            group_labels[ident] = self._motion.pop(ident).last_movement

        new_events = detect_events(tables, assignment, self._prev_ids, clustering.tick,
                                   group_labels, trajectory_labels)
        self.events.extend(new_events)
        self._prev = clustering
        self._prev_ids = assignment.identities
        return new_events

    def lifecycles(self) -> list[ClusterLifecycle]:
        return assemble_lifecycles(self.events, self.memberships)


def track(clusterings: Sequence[FrameClustering], params: AnalysisParams,
          trajectory_labels: Mapping[int, Mapping[Hashable, Movement]] | None = None,
          id_prefix: str = "c"):
    """Run the tracker over a clustering sequence; returns ``(events, lifecycles)``."""
    tracker = LifecycleTracker(params, id_prefix)
    labels = trajectory_labels or {}
    for clustering in clusterings:
        tracker.update(clustering, labels.get(clustering.tick))
    return tracker.events, tracker.lifecycles()
