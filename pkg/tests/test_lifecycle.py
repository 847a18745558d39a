import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from clusterlife.lifecycle import (
    Direction,
    EventKind,
    LifecycleEvent,
    LifecycleTracker,
    assemble_lifecycles,
    build_candidate_tables,
    detect_events,
    resolve_identities,
    same_cluster,
    track,
)
from clusterlife.model import AnalysisParams, TrajectoryPoint, euclidean_distance
from clusterlife.snapshot import ClusterInstance, FrameClustering
from oracles import eq1

K = EventKind


def params(**kw):
    values = dict(r_e=0.1, r_n=0.5, r_g_error=0.5, eps=1.0, max_dist_centroid=5.0,
                  min_cluster=2, min_shared=0.5, partial_shared=0.25)
    values.update(kw)
    return AnalysisParams(**values)


def frame(tick, groups, centroids=None, min_cluster=2):
    clusters = []
    for k, members in enumerate(groups):
        x, y = centroids[k] if centroids else (0.0, 0.0)
        clusters.append(ClusterInstance(tick, k, frozenset(members), TrajectoryPoint(x, y, tick),
                                        len(members) >= min_cluster))
    return FrameClustering(tick, tuple(clusters), frozenset())


def summary(events):
    return [(e.kind.value, e.tick, e.subject, e.participants) for e in events]


class TestSameCluster:
    def test_ten_versus_eight_subset(self):
        assert same_cluster(set(range(1, 11)), set(range(1, 9)), 0.5)

    def test_ten_versus_fourteen_with_four_shared(self):
        c2 = set(range(1, 5)) | set(range(11, 21))
        assert len(c2) == 14
        assert not same_cluster(set(range(1, 11)), c2, 0.5)

    def test_identity_and_disjoint(self):
        a = set(range(7))
        assert same_cluster(a, a, 0.99)
        assert not same_cluster(a, set(range(10, 17)), 0.01)

    def test_strict_inequality(self):
        # exactly half on both sides is not enough
        assert not same_cluster({1, 2, 3, 4}, {3, 4, 5, 6}, 0.5)

    @given(st.frozensets(st.integers(0, 30), min_size=1), st.frozensets(st.integers(0, 30), min_size=1),
           st.floats(0.01, 0.99))
    def test_symmetric_and_matches_formula(self, a, b, ms):
        assert same_cluster(a, b, ms) == same_cluster(b, a, ms) == eq1(a, b, ms)

    @given(st.frozensets(st.integers(0, 30), min_size=1), st.frozensets(st.integers(0, 30), min_size=1),
           st.floats(0.01, 0.98), st.floats(0.0, 0.5))
    def test_monotone_in_min_shared(self, a, b, lo, delta):
        hi = min(lo + delta, 0.99)
        if same_cluster(a, b, hi):
            assert same_cluster(a, b, lo)


class TestCandidateTables:
    def test_near_pair_in_both(self):
        prev = frame(0, [{1, 2, 3}], [(0, 0)])
        curr = frame(1, [{1, 2, 3}], [(3, 0)])
        fwd, bwd = build_candidate_tables(prev, curr, params())
        assert fwd.direction is Direction.PREV_TO_CURR and bwd.direction is Direction.CURR_TO_PREV
        assert [l.cluster for l in fwd.entries[prev.clusters[0]]] == [curr.clusters[0]]
        assert [l.cluster for l in bwd.entries[curr.clusters[0]]] == [prev.clusters[0]]

    def test_far_pair_absent(self):
        prev = frame(0, [{1, 2, 3}], [(0, 0)])
        curr = frame(1, [{1, 2, 3}], [(10, 0)])
        fwd, bwd = build_candidate_tables(prev, curr, params())
        assert fwd.entries[prev.clusters[0]] == ()
        assert bwd.entries[curr.clusters[0]] == ()

    def test_invalid_clusters_excluded(self):
        prev = frame(0, [{1, 2, 3}, {4}], [(0, 0), (1, 0)])
        curr = frame(1, [{1, 2, 3}], [(0, 0)])
        fwd, _ = build_candidate_tables(prev, curr, params())
        assert list(fwd.entries) == [prev.clusters[0]]

    def test_order_checked(self):
        with pytest.raises(ValueError):
            build_candidate_tables(frame(2, []), frame(1, []), params())

    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_all_pairs_oracle(self, rnd):
        p = params(max_dist_centroid=4.0, min_shared=rnd.uniform(0.1, 0.9),
                   partial_shared=rnd.uniform(0.05, 0.9), min_cluster=rnd.randint(2, 4))

        def rand_frame(t):
            groups = [set(rnd.sample(range(40), rnd.randint(1, 10))) for _ in range(rnd.randint(0, 6))]
            cents = [(rnd.uniform(0, 10), rnd.uniform(0, 10)) for _ in groups]
            return frame(t, groups, cents, p.min_cluster)

        prev, curr = rand_frame(0), rand_frame(1)
        fwd, bwd = build_candidate_tables(prev, curr, p)
        for table, keys, values in ((fwd, prev, curr), (bwd, curr, prev)):
            expected = {}
            for a in keys.clusters:
                if not a.valid:
                    continue
                row = []
                for b in values.clusters:
                    if not b.valid:
                        continue
                    d = ((a.centroid.x - b.centroid.x) ** 2 + (a.centroid.y - b.centroid.y) ** 2) ** 0.5
                    if d < p.max_dist_centroid:
                        shared = len(a.members & b.members)
                        row.append((b.index, shared, eq1(a.members, b.members, p.min_shared),
                                    shared >= p.partial_shared * len(a.members)))
                expected[a.index] = row
            got = {k.index: [(l.cluster.index, l.shared, l.same, l.partial) for l in links]
                   for k, links in table.entries.items()}
            assert got == expected


class TestResolve:
    def test_continuation(self):
        prev = frame(0, [set(range(1, 11))])
        curr = frame(1, [set(range(1, 10)) | {21}])
        a = resolve_identities(build_candidate_tables(prev, curr, params()), {0: "A"})
        assert a.identities == {0: "A"}
        assert a.fresh == () and a.ended == ()

    def test_empty_previous(self):
        curr = frame(1, [{1, 2}, {3, 4}])
        a = resolve_identities(build_candidate_tables(frame(0, []), curr, params()), {},
                               iter(["x", "y"]).__next__)
        assert a.identities == {0: "x", 1: "y"}
        assert a.fresh == (0, 1)

    def test_conflict_more_shared_wins(self):
        prev = frame(0, [set(range(10))], [(0, 0)])
        curr = frame(1, [set(range(5)) | {20}, {5, 6, 7, 8}], [(0, 4), (0, 1)])
        a = resolve_identities(build_candidate_tables(prev, curr, params(min_shared=0.3)), {0: "P"})
        assert a.identities[0] == "P"
        assert a.identities[1] != "P"

    def test_conflict_tie_broken_by_distance(self):
        prev = frame(0, [set(range(10))], [(0, 0)])
        curr = frame(1, [{0, 1, 2, 3}, {4, 5, 6, 7}], [(0, 3), (0, 1)])
        tables = build_candidate_tables(prev, curr, params(min_shared=0.3))
        assert all(l.same for l in tables[0].entries[prev.clusters[0]])
        a = resolve_identities(tables, {0: "P"})
        assert a.identities[1] == "P"
        assert a.continued == {0: 1}


def two_frames(prev_groups, curr_groups, **kw):
    tracker = LifecycleTracker(params(**kw))
    tracker.update(frame(0, prev_groups))
    return tracker, tracker.update(frame(1, curr_groups))


class TestDetectEvents:
    def test_even_split_ends_parent(self):
        tracker, events = two_frames([set(range(1, 11))], [set(range(1, 6)), set(range(6, 11))])
        assert summary(events) == [
            ("start", 1, "c1", ()),
            ("start", 1, "c2", ()),
            ("split", 1, "c0", ("c1", "c2")),
            ("end", 1, "c0", ()),
        ]

    def test_even_merge(self):
        tracker, events = two_frames([set(range(1, 11)), set(range(11, 21))], [set(range(1, 21))])
        assert summary(events) == [
            ("start", 1, "c2", ()),
            ("merge", 1, "c2", ("c0", "c1")),
            ("end", 1, "c0", ()),
            ("end", 1, "c1", ()),
        ]

    def test_member_churn(self):
        tracker, events = two_frames([set(range(1, 11))], [set(range(1, 10)) | {21}])
        assert summary(events) == [("enter", 1, "c0", (21,)), ("leave", 1, "c0", (10,))]

    def test_uneven_split_continues_larger_part(self):
        tracker, events = two_frames([set(range(12))], [set(range(8)), set(range(8, 12))])
        assert summary(events) == [
            ("start", 1, "c1", ()),
            ("split", 1, "c0", ("c0", "c1")),
        ]

    def test_uneven_merge_keeps_dominant_identity(self):
        tracker, events = two_frames([set(range(12)), set(range(12, 16))], [set(range(16))])
        assert summary(events) == [
            ("merge", 1, "c0", ("c0", "c1")),
            ("end", 1, "c1", ()),
        ]

    def test_shrinking_below_min_cluster_ends(self):
        tracker, events = two_frames([{1, 2, 3}], [{1}], min_cluster=3)
        assert summary(events) == [("end", 1, "c0", ())]

    def test_movement_attributes_recorded(self):
        tracker = LifecycleTracker(params())
        tracker.update(frame(0, [set(range(5))]), {i: "move" for i in range(5)})
        events = tracker.update(frame(1, [set(range(4)) | {9}]), {9: "stop"})
        enter = next(e for e in events if e.kind is K.ENTER)
        assert enter.participant_movements == ("stop",)
        assert enter.subject_movement is not None

    def test_direct_call(self):
        prev = frame(0, [set(range(1, 11))])
        curr = frame(1, [set(range(1, 10)) | {21}])
        tables = build_candidate_tables(prev, curr, params())
        a = resolve_identities(tables, {0: "A"})
        assert summary(detect_events(tables, a, {0: "A"}, 1)) == [
            ("enter", 1, "A", (21,)), ("leave", 1, "A", (10,))]


class TestAssemble:
    def test_simple_stream(self):
        evs = [LifecycleEvent(K.START, 0, "A"), LifecycleEvent(K.ENTER, 5, "A", ("x",)),
               LifecycleEvent(K.END, 10, "A")]
        (lc,) = assemble_lifecycles(evs, {"A": {0: frozenset("y")}})
        assert lc.events == tuple(evs)
        assert (lc.birth, lc.death, lc.lifetime()) == (0, 10, 10)

    def test_empty(self):
        assert assemble_lifecycles([], {}) == []

    def test_out_of_order(self):
        evs = [LifecycleEvent(K.START, 5, "A"), LifecycleEvent(K.START, 2, "B")]
        with pytest.raises(ValueError):
            assemble_lifecycles(evs, {})

    def test_event_participant_rules(self):
        with pytest.raises(ValueError):
            LifecycleEvent(K.MERGE, 0, "A", ("B", "B"))
        with pytest.raises(ValueError):
            LifecycleEvent(K.ENTER, 0, "A")
        with pytest.raises(ValueError):
            LifecycleEvent(K.START, 0, "A", ("x",))


def random_sequence(rnd, n_ticks=12, pool=30):
    frames = []
    for t in range(n_ticks):
        ids = rnd.sample(range(pool), rnd.randint(0, pool))
        groups, i = [], 0
        while i < len(ids):
            n = rnd.randint(1, 9)
            groups.append(ids[i:i + n])
            i += n
        cents = [(rnd.uniform(0, 6), rnd.uniform(0, 6)) for _ in groups]
        frames.append(frame(t, groups, cents, min_cluster=2))
    return frames


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False), st.floats(0.2, 0.8))
def test_tracking_invariants(rnd, min_shared):
    p = params(min_shared=min_shared, max_dist_centroid=4.0)
    clusterings = random_sequence(rnd)
    events, lifecycles = track(clusterings, p)
    last = clusterings[-1]

    counts = {k: sum(e.kind is k for e in events) for k in K}
    alive = [lc for lc in lifecycles if lc.alive]
    assert counts[K.START] - counts[K.END] == len(alive) == len(last.valid_clusters)

    for lc in lifecycles:
        assert lc.events[0].kind is K.START
        ends = [e for e in lc.events if e.kind is K.END]
        assert len(ends) <= 1 and (not ends or lc.events[-1].kind is K.END)
        assert [e.tick for e in lc.events] == sorted(e.tick for e in lc.events)
        stop = lc.death if lc.death is not None else last.tick
        assert set(range(lc.birth, stop + 1)) <= set(lc.members)
        for e in lc.events:
            if e.kind in (K.ENTER, K.LEAVE):
                assert lc.birth <= e.tick <= stop

    for e in events:
        if e.kind in (K.MERGE, K.SPLIT):
            assert len(set(e.participants)) == len(e.participants) >= 2

    # partial injection per tick
    by_tick = {}
    for lc in lifecycles:
        for t, m in lc.members.items():
            if m:
                by_tick.setdefault(t, []).append(lc.identity)
    for t, ids in by_tick.items():
        assert len(ids) == len(set(ids))
        assert len(ids) == len(clusterings[t].valid_clusters)

    # determinism
    again, _ = track(clusterings, p)
    assert again == events
