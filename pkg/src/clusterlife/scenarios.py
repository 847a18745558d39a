"""Synthetic trajectory scenarios with planted lifecycle events, and scoring.

Every scenario is a row of independent *units*, each confined to a square box
of side ``UNIT_SPAN * scale`` centred on its base point. Blobs are tight (all
members within ``0.6 * scale`` of each other) and distinct blobs stay at least
``4 * scale`` apart except while a planted interaction happens. Interactions
are instantaneous jumps between "coincident" and "3 * scale either side of the
path", so the affected tick is unambiguous.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .lifecycle import EventKind, LifecycleEvent
from .model import AnalysisParams, Trajectory, TrajectoryPoint

KINDS = ("stable", "split", "merge", "churn", "crossing", "mixed")
UNIT_SPAN = 80.0
MARGIN = 3  # stable frames before and after every planted event
_BLOB_RADIUS = 0.25
_JITTER = 0.05
_SIDE_OFFSET = 3.0


class InfeasibleScenario(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    n_clusters: int = 2
    members: int = 6
    horizon: int = 30
    n_noise: int = 4
    scale: float = 1.0
    seed: int = 0


@dataclass
class GroundTruth:
    events: list[LifecycleEvent] = field(default_factory=list)
    identity_count: int = 0


def scenario_params(spec: ScenarioSpec, **overrides) -> AnalysisParams:
    """Analysis parameters matched to a scenario's geometry."""
    s = spec.scale
    values = dict(r_e=0.1 * s, r_n=0.5 * s, r_g_error=0.5 * s, eps=1.0 * s,
                  max_dist_centroid=5.0 * s, min_pts=3, min_cluster=3)
    values.update(overrides)
    return AnalysisParams(**values)


def _unit_kinds(spec, rng):
    if spec.kind == "mixed":
        return [str(k) for k in rng.choice(KINDS[:-1], size=spec.n_clusters)]
    if spec.kind in ("merge", "crossing"):
        return [spec.kind] * (spec.n_clusters // 2)
    return [spec.kind] * spec.n_clusters


def _min_part(members, params):
    return max(params.min_cluster, math.ceil(params.partial_shared * members - 1e-12))


def check_feasible(spec: ScenarioSpec, params: AnalysisParams) -> None:
    if spec.kind not in KINDS:
        raise InfeasibleScenario(f"unknown scenario kind {spec.kind!r}; expected one of {KINDS}")
    if spec.n_clusters < 1:
        raise InfeasibleScenario("n_clusters must be >= 1")
    if spec.kind in ("merge", "crossing") and (spec.n_clusters < 2 or spec.n_clusters % 2):
        raise InfeasibleScenario(f"{spec.kind} needs an even n_clusters >= 2")
    if spec.members < params.min_cluster or spec.members < params.min_pts:
        raise InfeasibleScenario(
            f"members={spec.members} is below min_cluster={params.min_cluster} / min_pts={params.min_pts}")
    if spec.kind in ("split", "mixed") and spec.members < 2 * _min_part(spec.members, params):
        raise InfeasibleScenario(
            f"split needs members >= {2 * _min_part(spec.members, params)} "
            f"(2 x max(min_cluster, partial_shared * members))")
    if spec.kind in ("split", "merge", "mixed") and params.min_shared < 0.5:
        raise InfeasibleScenario("split/merge truth needs min_shared >= 0.5")
    if spec.horizon < 2 * MARGIN + 2:
        raise InfeasibleScenario(f"horizon must be >= {2 * MARGIN + 2} ticks")
    if spec.n_noise < 0:
        raise InfeasibleScenario("n_noise must be >= 0")
    if spec.scale <= 0:
        raise InfeasibleScenario("scale must be > 0")
    if params.eps > spec.scale or params.max_dist_centroid <= 4.5 * spec.scale \
            or params.max_dist_centroid > 50 * spec.scale:
        raise InfeasibleScenario("params do not match the scenario scale")


class _Builder:
    """Accumulates positions per trajectory slot and the planted truth."""

    def __init__(self, spec, params, rng):
        self.spec, self.params, self.rng = spec, params, rng
        self.s = spec.scale
        self.tracks: dict[int, dict[int, tuple]] = defaultdict(dict)
        self.truth: list[tuple] = []
        self.identities: set[str] = set()
        self.slots = 0
        self.parked = 0

    def new_slot(self):
        self.slots += 1
        return self.slots - 1

    def blob_offsets(self, n):
        r = _BLOB_RADIUS * self.s * np.sqrt(self.rng.random(n))
        a = self.rng.random(n) * 2 * np.pi
        return np.column_stack((r * np.cos(a), r * np.sin(a)))

    def place(self, slot, t, xy):
        j = _JITTER * self.s * np.sqrt(self.rng.random())
        a = self.rng.random() * 2 * np.pi
        self.tracks[slot][t] = (float(xy[0] + j * math.cos(a)), float(xy[1] + j * math.sin(a)))

    def plant(self, kind, tick, subject, participants=()):
        self.truth.append((kind, tick, subject, tuple(participants)))
        if kind is EventKind.START:
            self.identities.add(subject)

    def path(self, base):
        """Straight drift that stays within 10 * scale of its start."""
        H = self.spec.horizon
        speed = min(0.3, 10.0 / H) * self.s
        heading = self.rng.random() * 2 * np.pi
        u = np.array([math.cos(heading), math.sin(heading)])
        start = base + (self.rng.random(2) - 0.5) * 6 * self.s - u * speed * H / 2
        return (lambda t: start + u * speed * t), np.array([-u[1], u[0]])

    def parking(self, base):
        row, col = divmod(self.parked, 20)
        self.parked += 1
        return base + np.array([-30.0 + 3.0 * col, -30.0 - 3.0 * row]) * self.s

    def event_tick(self):
        return int(self.rng.integers(MARGIN, self.spec.horizon - MARGIN))


def _stable(b, base, name):
    centre, _ = b.path(base)
    slots = [b.new_slot() for _ in range(b.spec.members)]
    offs = b.blob_offsets(len(slots))
    for t in range(b.spec.horizon):
        for slot, o in zip(slots, offs):
            b.place(slot, t, centre(t) + o)
    b.plant(EventKind.START, 0, name)


def _split(b, base, name):
    m = b.spec.members
    lo = _min_part(m, b.params)
    h1 = int(b.rng.integers(lo, m - lo + 1))
    centre, side = b.path(base)
    slots = [b.new_slot() for _ in range(m)]
    offs = b.blob_offsets(m)
    halves = [(slots[:h1], offs[:h1], +1), (slots[h1:], offs[h1:], -1)]
    ts = b.event_tick()
    for t in range(b.spec.horizon):
        for hs, ho, sign in halves:
            shift = sign * _SIDE_OFFSET * b.s * side if t >= ts else 0.0
            for slot, o in zip(hs, ho):
                b.place(slot, t, centre(t) + shift + o)

    b.plant(EventKind.START, 0, name)
    sizes = (h1, m - h1)
    heir = next((i for i, h in enumerate(sizes) if h > b.params.min_shared * m), None)
    children = [name if i == heir else f"{name}.{i + 1}" for i in range(2)]
    b.plant(EventKind.SPLIT, ts, name, children)
    if heir is None:
        b.plant(EventKind.END, ts, name)
    for child in children:
        if child != name:
            b.plant(EventKind.START, ts, child)


def _merge(b, base, name):
    a = b.spec.members
    p = b.params.partial_shared
    lo = max(b.params.min_cluster, math.ceil(p * a / (1 - p) - 1e-12))
    sizes = (a, int(b.rng.integers(lo, a + 1)))
    centre, side = b.path(base)
    names = [f"{name}.a", f"{name}.b"]
    tm = b.event_tick()
    for sign, n in zip((+1, -1), sizes):
        slots = [b.new_slot() for _ in range(n)]
        offs = b.blob_offsets(n)
        for t in range(b.spec.horizon):
            shift = sign * _SIDE_OFFSET * b.s * side if t < tm else 0.0
            for slot, o in zip(slots, offs):
                b.place(slot, t, centre(t) + shift + o)
    for n in names:
        b.plant(EventKind.START, 0, n)
    total = sum(sizes)
    heir = next((i for i, n in enumerate(sizes) if n > b.params.min_shared * total), None)
    merged = names[heir] if heir is not None else f"{name}.m"
    b.plant(EventKind.MERGE, tm, merged, names)
    for i, n in enumerate(names):
        if i != heir:
            b.plant(EventKind.END, tm, n)
    if heir is None:
        b.plant(EventKind.START, tm, merged)


def _churn(b, base, name):
    m = b.spec.members
    H = b.spec.horizon
    centre, _ = b.path(base)
    candidates = list(range(MARGIN, H - MARGIN, MARGIN))
    k = int(b.rng.integers(1, len(candidates) + 1))
    swaps = sorted(int(t) for t in b.rng.choice(candidates, size=k, replace=False))

    # (slot, offset, first tick in blob, last tick in blob, parking spot)
    residents = []
    for slot, o in zip([b.new_slot() for _ in range(m)], b.blob_offsets(m)):
        residents.append([slot, o, 0, H, None])
    timeline = list(residents)
    for ts in swaps:
        active = [r for r in residents if r[3] == H]
        leaver = active[int(b.rng.integers(len(active)))]
        leaver[3] = ts
        leaver[4] = b.parking(base)
        newcomer = [b.new_slot(), b.blob_offsets(1)[0], ts, H, b.parking(base)]
        residents.append(newcomer)
        timeline.append(newcomer)
        b.plant(EventKind.LEAVE, ts, name, [leaver[0]])
        b.plant(EventKind.ENTER, ts, name, [newcomer[0]])
    for slot, o, first, last, spot in timeline:
        for t in range(H):
            b.place(slot, t, centre(t) + o if first <= t < last else spot)
    b.plant(EventKind.START, 0, name)


def _crossing(b, base, name):
    H = b.spec.horizon
    speed = min(1.0, 28.0 / H) * b.s
    gap = math.ceil(4.5 * math.sqrt(2) * b.s / speed) + 1
    if gap > H - 2:
        raise InfeasibleScenario(f"crossing needs horizon > {gap + 2} at this scale")
    ta = (H - gap) // 2
    heading = b.rng.random() * 2 * np.pi
    ua = np.array([math.cos(heading), math.sin(heading)])
    ub = np.array([-ua[1], ua[0]])
    for label, u, tc in (("a", ua, ta), ("b", ub, ta + gap)):
        slots = [b.new_slot() for _ in range(b.spec.members)]
        offs = b.blob_offsets(len(slots))
        for t in range(H):
            for slot, o in zip(slots, offs):
                b.place(slot, t, base + u * speed * (t - tc) + o)
        b.plant(EventKind.START, 0, f"{name}.{label}")


_UNITS = {"stable": _stable, "split": _split, "merge": _merge, "churn": _churn,
          "crossing": _crossing}


def generate(spec: ScenarioSpec, params: AnalysisParams | None = None):
    """Build ``(trajectories, truth)`` for a scenario; deterministic per seed.

    Trajectory ids are ``t0000``-style tokens assigned in random order, so
    cluster membership is not contiguous in id order.
    """
    params = params or scenario_params(spec)
    check_feasible(spec, params)
    rng = np.random.default_rng(spec.seed)
    b = _Builder(spec, params, rng)
    s = spec.scale
    kinds = _unit_kinds(spec, rng)
    for k, kind in enumerate(kinds):
        base = np.array([(k + 0.5) * UNIT_SPAN, 0.5 * UNIT_SPAN]) * s
        _UNITS[kind](b, base, f"u{k}")

    for i in range(spec.n_noise):
        k = i % len(kinds)
        base = np.array([(k + 0.5) * UNIT_SPAN, 0.5 * UNIT_SPAN]) * s
        spot = base + np.array([-30.0 + 3.0 * (i // len(kinds)), 30.0]) * s
        slot = b.new_slot()
        present = rng.random(spec.horizon) < 0.8
        present[rng.integers(spec.horizon)] = True
        for t in np.flatnonzero(present):
            b.place(slot, int(t), spot)

    order = rng.permutation(b.slots)
    width = max(4, len(str(b.slots)))
    names = {slot: f"t{int(n):0{width}d}" for slot, n in zip(range(b.slots), order)}
    trajectories = [
        Trajectory(names[slot], [TrajectoryPoint(x, y, t) for t, (x, y) in sorted(pts.items())])
        for slot, pts in sorted(b.tracks.items(), key=lambda kv: names[kv[0]])
    ]
    events = []
    for kind, tick, subject, parts in b.truth:
        if kind in (EventKind.ENTER, EventKind.LEAVE):
            parts = tuple(names[p] for p in parts)
        events.append(LifecycleEvent(kind, tick, subject, parts))
    events.sort(key=LifecycleEvent.sort_key)
    return trajectories, GroundTruth(events, len(b.identities))


def score(detected, truth, tolerance: int = 1) -> dict:
    """Precision and recall per event kind and overall.

    A detected event matches a truth event of the same kind whose tick is
    within ``tolerance`` and whose participant count agrees. Pairs are matched
    greedily by tick distance, each event used at most once. A kind with no
    events on either side scores 1.0.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    truth_events = truth.events if isinstance(truth, GroundTruth) else list(truth)
    detected = list(detected)
    pairs = []
    for i, te in enumerate(truth_events):
        for j, de in enumerate(detected):
            dt = abs(te.tick - de.tick)
            if (te.kind is de.kind and dt <= tolerance
                    and len(te.participants) == len(de.participants)):
                pairs.append((dt, i, j))
    pairs.sort()
    used_t, used_d = set(), set()
    for _, i, j in pairs:
        if i not in used_t and j not in used_d:
            used_t.add(i)
            used_d.add(j)

    def ratio(hit, total):
        return hit / total if total else 1.0

    report = {}
    for kind in EventKind:
        t_idx = [i for i, e in enumerate(truth_events) if e.kind is kind]
        d_idx = [j for j, e in enumerate(detected) if e.kind is kind]
        report[kind.value] = {
            "precision": ratio(sum(j in used_d for j in d_idx), len(d_idx)),
            "recall": ratio(sum(i in used_t for i in t_idx), len(t_idx)),
            "detected": len(d_idx),
            "truth": len(t_idx),
        }
    report["overall"] = {
        "precision": ratio(len(used_d), len(detected)),
        "recall": ratio(len(used_t), len(truth_events)),
        "detected": len(detected),
        "truth": len(truth_events),
    }
    return report
