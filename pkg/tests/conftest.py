import pytest

from clusterlife.model import AnalysisParams, SampledFrame, TrajectoryPoint


@pytest.fixture
def params():
    return AnalysisParams(r_e=1.0, r_n=3.0, r_g_error=1.0, eps=1.0, max_dist_centroid=5.0,
                          min_pts=3, min_cluster=3)


def make_frame(tick, coords):
    """Frame from ``{id: (x, y)}``."""
    return SampledFrame(tick, {tid: TrajectoryPoint(float(x), float(y), tick)
                               for tid, (x, y) in coords.items()})


def straddle_frames():
    """Six-point blob crossing x = 10; it straddles the border at ticks 3, 4, 5."""
    centres = [7.0, 7.5, 8.0, 9.9, 10.0, 10.1, 12.0, 12.5, 13.0]
    frames = []
    for t, c in enumerate(centres):
        coords = {}
        for k in range(3):
            coords[f"l{k}"] = (c - 0.2, 5.0 + 0.1 * k)
            coords[f"r{k}"] = (c + 0.2, 5.0 + 0.1 * k)
        frames.append(make_frame(t, coords))
    return frames
