import csv

import pytest

from clusterlife.estimator import analyze
from clusterlife.io import (
    TrajectoryFormatError, build_run_config, emit_plot_data, export_results, load_config,
    load_events, load_results, load_trajectories, load_truth, export_truth, write_trajectories,
)
from clusterlife.lifecycle import ClusterLifecycle, EventKind, LifecycleEvent
from clusterlife.model import NoDataError
from clusterlife.scenarios import ScenarioSpec, generate, scenario_params


def write(path, text):
    path.write_text(text)
    return path


def test_load_three_rows(tmp_path):
    f = write(tmp_path / "a.csv", "traj_id,tick,x,y\na,0,1.0,2.0\na,1,1.5,2.0\nb,0,0,0\n")
    trajs = load_trajectories(f)
    assert [t.id for t in trajs] == ["a", "b"]
    assert [p.tick for p in trajs[0].points] == [0, 1]
    assert trajs[0].points[1].x == 1.5


def test_rows_out_of_order_are_sorted(tmp_path):
    f = write(tmp_path / "a.csv", "traj_id,tick,x,y\na,3,0,0\na,1,0,0\n")
    assert load_trajectories(f)[0].ticks == [1, 3]


def test_duplicate_names_trajectory_and_tick(tmp_path):
    f = write(tmp_path / "a.csv", "traj_id,tick,x,y\nt7,5,0,0\nt7,5,1,1\n")
    with pytest.raises(TrajectoryFormatError, match=r"t7.*5"):
        load_trajectories(f)


def test_malformed_line_reports_line_number(tmp_path):
    f = write(tmp_path / "a.csv", "traj_id,tick,x,y\na,0,0,0\na,1,zero,0\n")
    with pytest.raises(TrajectoryFormatError, match=":3:"):
        load_trajectories(f)


@pytest.mark.parametrize("text", ["", "traj_id,tick,x,y\n"])
def test_empty_input(tmp_path, text):
    with pytest.raises(NoDataError):
        load_trajectories(write(tmp_path / "a.csv", text))


def test_bad_header(tmp_path):
    with pytest.raises(TrajectoryFormatError, match=":1:"):
        load_trajectories(write(tmp_path / "a.csv", "id,t,x,y\n"))


def test_trajectory_round_trip(tmp_path):
    trajs, _ = generate(ScenarioSpec("churn", seed=2))
    write_trajectories(trajs, tmp_path / "t.csv")
    back = load_trajectories(tmp_path / "t.csv")
    assert [(t.id, t.points) for t in back] == [(t.id, t.points) for t in trajs]


@pytest.fixture(scope="module")
def split_run():
    spec = ScenarioSpec("split", n_clusters=2, seed=42)
    trajs, truth = generate(spec)
    return analyze(trajs, scenario_params(spec)), truth


def test_export_reload_compares_equal(tmp_path, split_run):
    result, _ = split_run
    path = tmp_path / "r.jsonl"
    export_results(result.lifecycles, result.statistics, result.border_report, path)
    lifecycles, stats, border = load_results(path)
    assert lifecycles == sorted(result.lifecycles, key=lambda lc: (lc.birth, lc.identity))
    assert stats == result.statistics
    assert load_events(path) == result.events


def test_export_is_byte_identical(tmp_path, split_run):
    result, _ = split_run
    for name in ("a", "b"):
        export_results(list(reversed(result.lifecycles)), result.statistics, {}, tmp_path / name)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_empty_export(tmp_path):
    export_results([], {}, {}, tmp_path / "r.jsonl")
    assert load_results(tmp_path / "r.jsonl") == ([], {}, {})


def test_truth_round_trip(tmp_path, split_run):
    _, truth = split_run
    export_truth(truth, tmp_path / "t.jsonl")
    assert load_truth(tmp_path / "t.jsonl") == truth


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_plot_data_single_cluster(tmp_path):
    ev = (LifecycleEvent(EventKind.START, 0, "c0"), LifecycleEvent(EventKind.END, 10, "c0"))
    members = {t: frozenset({1, 2, 3}) for t in range(10)}
    members[10] = frozenset()
    emit_plot_data([ClusterLifecycle("c0", 0, 10, members, ev)], tmp_path / "p.csv")
    rows = read_csv(tmp_path / "p.csv")
    assert len(rows) == 11
    assert [r["active_clusters"] for r in rows] == ["1"] * 10 + ["0"]
    assert rows[-1]["cumulative_ends"] == "1"


def test_plot_data_empty_is_header_only(tmp_path):
    emit_plot_data([], tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().strip() == (
        "tick,active_clusters,size_min,size_mean,size_max,cumulative_starts,cumulative_ends")


def test_plot_data_cumulative_monotone(tmp_path, split_run):
    result, _ = split_run
    emit_plot_data(result.lifecycles, tmp_path / "p.csv")
    rows = read_csv(tmp_path / "p.csv")
    for col in ("cumulative_starts", "cumulative_ends"):
        vals = [int(r[col]) for r in rows]
        assert vals == sorted(vals)


def test_config_parsing(tmp_path):
    f = write(tmp_path / "c.cfg", "# run\neps = 2.5\nmin_pts=4\ninput=data.csv  # here\nworkers=3\n")
    assert load_config(f) == {"eps": 2.5, "min_pts": 4, "input": "data.csv", "workers": 3}


def test_config_unknown_key(tmp_path):
    with pytest.raises(ValueError, match="unknown key 'epsilon'"):
        load_config(write(tmp_path / "c.cfg", "epsilon=1\n"))


def test_run_config_requires_scale_params():
    with pytest.raises(ValueError, match="max_dist_centroid"):
        build_run_config({"eps": 1, "r_e": 1, "r_n": 1, "r_g_error": 1})
