"""Trajectory CSV ingestion, results export/reload, plot data and run configs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from .lifecycle import ClusterLifecycle, EventKind, LifecycleEvent
from .model import AnalysisParams, NoDataError, Trajectory, TrajectoryPoint, id_sort_key
from .motion import Movement
from .scenarios import GroundTruth

CSV_COLUMNS = ("traj_id", "tick", "x", "y")
INT_PARAMS = {"min_pts", "min_cluster", "interval", "staleness_window"}
PARAM_NAMES = tuple(f.name for f in fields(AnalysisParams))


class TrajectoryFormatError(ValueError):
    pass


def load_trajectories(path) -> list[Trajectory]:
    """Read ``traj_id,tick,x,y`` rows into trajectories sorted by tick.

    Errors name the offending file line; duplicate ``(traj_id, tick)`` pairs
    are rejected.
    """
    rows: dict[str, dict[int, TrajectoryPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise NoDataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if sorted(header) != sorted(CSV_COLUMNS):
            raise TrajectoryFormatError(
                f"{path}:1: expected header {','.join(CSV_COLUMNS)}, got {','.join(header)}")
        col = {name: header.index(name) for name in CSV_COLUMNS}
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise TrajectoryFormatError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            tid = row[col["traj_id"]].strip()
            try:
                tick = int(row[col["tick"]])
                point = TrajectoryPoint(float(row[col["x"]]), float(row[col["y"]]), tick)
            except (TypeError, ValueError) as exc:
                raise TrajectoryFormatError(f"{path}:{line}: {exc}") from None
            if not tid:
                raise TrajectoryFormatError(f"{path}:{line}: empty traj_id")
            points = rows.setdefault(tid, {})
            if tick in points:
                raise TrajectoryFormatError(
                    f"{path}:{line}: duplicate reading for trajectory {tid} at tick {tick}")
            points[tick] = point
    if not rows:
        raise NoDataError(f"{path}: no trajectory rows")
    return [Trajectory(tid, [pts[t] for t in sorted(pts)])
            for tid, pts in sorted(rows.items(), key=lambda kv: id_sort_key(kv[0]))]


def write_trajectories(trajectories: Iterable[Trajectory], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for traj in sorted(trajectories, key=lambda t: id_sort_key(t.id)):
            for p in traj.points:
                writer.writerow((traj.id, p.tick, repr(p.x), repr(p.y)))


def event_to_dict(ev: LifecycleEvent) -> dict:
    return {
        "kind": ev.kind.value,
        "tick": ev.tick,
        "subject": ev.subject,
        "participants": list(ev.participants),
        "subject_movement": ev.subject_movement.value if ev.subject_movement else None,
        "participant_movements": [m.value if m else None for m in ev.participant_movements],
    }


def event_from_dict(d: dict) -> LifecycleEvent:
    def mv(v):
        return Movement(v) if v else None
    return LifecycleEvent(EventKind(d["kind"]), int(d["tick"]), d["subject"],
                          tuple(d.get("participants", ())), mv(d.get("subject_movement")),
                          tuple(mv(v) for v in d.get("participant_movements", ())))


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def lifecycle_to_dict(lc: ClusterLifecycle) -> dict:
    return {
        "record": "lifecycle",
        "identity": lc.identity,
        "birth": lc.birth,
        "death": lc.death,
        "members": [[t, sorted(m, key=id_sort_key)] for t, m in sorted(lc.members.items())],
        "events": [event_to_dict(e) for e in sorted(lc.events, key=LifecycleEvent.sort_key)],
    }


def lifecycle_from_dict(d: dict) -> ClusterLifecycle:
    return ClusterLifecycle(
        d["identity"], d["birth"], d["death"],
        {int(t): frozenset(m) for t, m in d["members"]},
        tuple(event_from_dict(e) for e in d["events"]),
    )


def export_results(lifecycles: Sequence[ClusterLifecycle], statistics: dict,
                   border_report: dict | None, path) -> None:
    """Write one JSON line per lifecycle and a trailing summary line.

    Lifecycles are ordered by ``(birth, identity)`` and events by
    ``(tick, kind, subject)``, so equal analyses give byte-identical files.
    """
    ordered = sorted(lifecycles, key=lambda lc: (lc.birth, id_sort_key(lc.identity)))
    summary = {
        "record": "summary",
        "statistics": statistics,
        "border_report": [[t, n] for t, n in sorted((border_report or {}).items())],
    }
    with open(path, "w") as fh:
        for lc in ordered:
            fh.write(_dumps(lifecycle_to_dict(lc)) + "\n")
        fh.write(_dumps(summary) + "\n")


def load_results(path):
    """Return ``(lifecycles, statistics, border_report)`` from a results file."""
    lifecycles, statistics, border = [], {}, {}
    for rec in _records(path):
        if rec.get("record") == "lifecycle":
            lifecycles.append(lifecycle_from_dict(rec))
        elif rec.get("record") == "summary":
            statistics = rec.get("statistics", {})
            border = {int(t): n for t, n in rec.get("border_report", [])}
    return lifecycles, statistics, border


def _records(path):
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{n}: {exc.msg}") from None


def export_truth(truth, path) -> None:
    with open(path, "w") as fh:
        for ev in sorted(truth.events, key=LifecycleEvent.sort_key):
            fh.write(_dumps({"record": "event", **event_to_dict(ev)}) + "\n")
        fh.write(_dumps({"record": "truth", "identity_count": truth.identity_count}) + "\n")


def load_truth(path) -> GroundTruth:
    events, count = [], 0
    for rec in _records(path):
        if rec.get("record") == "event":
            events.append(event_from_dict(rec))
        elif rec.get("record") == "truth":
            count = rec["identity_count"]
    return GroundTruth(events, count)


def load_events(path) -> list[LifecycleEvent]:
    """Every event in a results file or a truth file, in canonical order."""
    events = []
    for rec in _records(path):
        if rec.get("record") == "lifecycle":
            events.extend(event_from_dict(e) for e in rec["events"])
        elif rec.get("record") == "event":
            events.append(event_from_dict(rec))
    return sorted(events, key=LifecycleEvent.sort_key)


PLOT_COLUMNS = ("tick", "active_clusters", "size_min", "size_mean", "size_max",
                "cumulative_starts", "cumulative_ends")


def plot_series(lifecycles: Sequence[ClusterLifecycle]) -> list[tuple]:
    ticks = sorted({t for lc in lifecycles for t in lc.members}
                   | {e.tick for lc in lifecycles for e in lc.events})
    starts = sorted(e.tick for lc in lifecycles for e in lc.events if e.kind is EventKind.START)
    ends = sorted(e.tick for lc in lifecycles for e in lc.events if e.kind is EventKind.END)
    rows = []
    for t in ticks:
        sizes = [len(lc.members[t]) for lc in lifecycles if lc.members.get(t)]
        rows.append((
            t, len(sizes),
            min(sizes) if sizes else 0,
            fmean(sizes) if sizes else 0.0,
            max(sizes) if sizes else 0,
            sum(s <= t for s in starts),
            sum(e <= t for e in ends),
        ))
    return rows


def emit_plot_data(lifecycles: Sequence[ClusterLifecycle], path) -> None:
    """Per-tick CSV: active clusters, size summary, cumulative starts/ends."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLOT_COLUMNS)
        writer.writerows(plot_series(lifecycles))


@dataclass
class RunConfig:
    input: str | None = None
    output: str | None = None
    params: dict | None = None
    workers: int = 1
    plot_data: str | None = None


RUN_KEYS = {"input", "output", "workers", "plot_data"}


def parse_param_value(name: str, raw: str):
    if name in INT_PARAMS:
        return int(raw)
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


def load_config(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment. Unknown keys fail."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in PARAM_NAMES:
            try:
                out[key] = parse_param_value(key, raw)
            except ValueError as exc:
                raise ValueError(f"{path}:{n}: bad value for {key}: {exc}") from None
        elif key == "workers":
            out[key] = int(raw)
        elif key in RUN_KEYS:
            out[key] = raw
        else:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
    return out


def build_run_config(values: dict) -> RunConfig:
    """Validate merged config/flag values into a run configuration."""
    params = {k: v for k, v in values.items() if k in PARAM_NAMES and v is not None}
    missing = [k for k in ("r_e", "r_n", "r_g_error", "eps", "max_dist_centroid") if k not in params]
    if missing:
        raise ValueError(f"missing required parameter(s): {', '.join(missing)}")
    AnalysisParams(**params)
    return RunConfig(values.get("input"), values.get("output"), params,
                     int(values.get("workers") or 1), values.get("plot_data"))
