import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dandelion.analytics import (
    ELSEWHERE,
    attention_grid,
    heading_histogram,
    in_cone,
    metrics_report,
    mobility_stats,
    occupancy_grid,
    sample_speeds,
    temporal_zone_occupancy,
)
from dandelion.errors import InvalidParams
from dandelion.ingest import TAU, ClassroomMap, Track, TrackSample, Zone

from conftest import make_track, random_track

ROOM = ClassroomMap(9.0, 7.0, (), ())


def brute_attention(track, room, cell, rng_m, half):
    """Per-cell, per-sample cone membership straight from the definition."""
    rows, cols = math.ceil(room.height / cell - 1e-9), math.ceil(room.width / cell - 1e-9)
    out = np.zeros((rows, cols))
    for r in range(rows):
        for c in range(cols):
            cx, cy = (c + 0.5) * cell, (r + 0.5) * cell
            hits = 0
            for s in track.samples:
                if in_cone(s.x, s.y, s.heading, cx, cy, rng_m, half):
                    hits += 1
            out[r, c] = hits * track.interval
    return out


# -- occupancy -----------------------------------------------------------------

def test_occupancy_single_location():
    grid = occupancy_grid(make_track([(2.3, 1.1, 0)] * 10), ROOM, 0.5)
    assert grid.values[2, 4] == 20.0
    assert grid.values.sum() == 20.0


def test_occupancy_edge_goes_to_higher_cell():
    grid = occupancy_grid(make_track([(1.0, 0.5, 0)]), ROOM, 0.5)
    assert grid.values[1, 2] == 2.0


def test_occupancy_overflow():
    grid = occupancy_grid(make_track([(9.0, 1.0, 0), (-1, 1, 0), (1, 1, 0)]), ROOM, 0.5)
    assert grid.overflow == 4.0
    assert grid.values.sum() + grid.overflow == 6.0
    assert grid.to_dict()["overflow"] == 4.0


def test_requires_resampled_track():
    with pytest.raises(InvalidParams):
        occupancy_grid(Track((TrackSample(0, 1, 1, 0),)), ROOM)


# -- attention -----------------------------------------------------------------

def test_attention_east_not_west():
    room = ClassroomMap(4.0, 4.0, (), ())
    tr = make_track([(2.0, 2.0, 0.0)])
    grid = attention_grid(tr, room, 1.0, 3.0, math.pi / 4)
    # centers at (2.5, 2.5) .. ; cell east of the person vs west
    assert grid.values[1, 3] == 2.0     # center (3.5, 1.5)
    assert grid.values[2, 3] == 2.0     # center (3.5, 2.5)
    assert grid.values[1, 0] == 0.0
    assert grid.values[2, 0] == 0.0


def test_attention_nearly_full_circle():
    room = ClassroomMap(4.0, 4.0, (), ())
    tr = make_track([(2.0, 1.5, 0.0)])
    grid = attention_grid(tr, room, 1.0, 3.0, math.pi - 1e-9)
    for r in range(4):
        for c in range(4):
            cx, cy = c + 0.5, r + 0.5
            behind = cy == 1.5 and cx < 2.0
            inside = math.hypot(cx - 2.0, cy - 1.5) <= 3.0
            assert grid.values[r, c] == (2.0 if inside and not behind else 0.0)


def test_attention_matches_brute_force():
    rng = random.Random(11)
    for _ in range(3):
        tr = random_track(rng, 60)
        for cone in ((3.0, math.radians(60)), (1.2, 0.3), (6.0, 2.9)):
            got = attention_grid(tr, ROOM, 0.5, *cone)
            assert np.array_equal(got.values, brute_attention(tr, ROOM, 0.5, *cone))


def test_attention_full_cone_dominance():
    tr = random_track(random.Random(2), 40)
    grid = attention_grid(tr, ROOM, 0.5, math.hypot(9, 7), math.pi)
    assert (grid.values == tr.tracked_time).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.2, 4), st.floats(0.2, 4), st.floats(0.05, 1.5), st.floats(0.05, 1.5))
def test_attention_monotone(seed, r1, r2, a1, a2):
    tr = random_track(random.Random(seed), 15)
    small = attention_grid(tr, ROOM, 0.5, min(r1, r2), min(a1, a2))
    big = attention_grid(tr, ROOM, 0.5, max(r1, r2), max(a1, a2))
    assert (big.values >= small.values).all()
    assert (big.values <= tr.tracked_time).all()


def test_attention_invalid():
    tr = make_track([(1, 1, 0)])
    with pytest.raises(InvalidParams):
        attention_grid(tr, ROOM, 0.5, 0.0, 1.0)
    with pytest.raises(InvalidParams):
        attention_grid(tr, ROOM, 0.5, 1.0, 0.0)
    with pytest.raises(InvalidParams):
        attention_grid(tr, ROOM, 0.5, 1.0, 4.0)


# -- headings ------------------------------------------------------------------

def test_histogram_all_zero_heading():
    hist = heading_histogram(make_track([(1, 1, 0.0)] * 5), 8)
    assert hist.values.tolist() == [10.0] + [0.0] * 7


def test_histogram_boundary_goes_up():
    hist = heading_histogram(make_track([(1, 1, math.pi / 4)]), 8)
    assert hist.values[1] == 2.0


def test_histogram_edges_and_invalid():
    assert heading_histogram(make_track([(1, 1, 0)]), 4).bin_edges()[-1] == pytest.approx(TAU)
    with pytest.raises(InvalidParams):
        heading_histogram(make_track([(1, 1, 0)]), 0)


# -- mobility ------------------------------------------------------------------

def test_stationary_is_one_stop():
    mob = mobility_stats(make_track([(3, 3, 0)] * 30))
    assert mob.path_length == 0.0 and mob.mean_speed == 0.0
    assert len(mob.stops) == 1 and mob.stops[0].duration == 60.0
    assert mob.stops[0].centroid == (3.0, 3.0)


def test_uniform_walk_has_no_stops():
    tr = make_track([(i, 0, 0) for i in range(11)], interval=2.0)
    mob = mobility_stats(tr, stop_speed=0.3)
    assert mob.path_length == 10.0
    assert mob.stops == ()
    assert mob.mean_speed == pytest.approx(10.0 / 22.0)


def test_dwell_walk_dwell_script():
    pts = [(1.0, 1.0, 0)] * 15 + [(1.0 + 0.7 * k, 1.0, 0) for k in range(1, 10)] + [(7.3, 1.0, 0)] * 15
    mob = mobility_stats(make_track(pts))
    assert len(mob.stops) == 2
    assert mob.stops[0].centroid == pytest.approx((1.0, 1.0))
    assert mob.stops[1].centroid == pytest.approx((7.3, 1.0))
    assert mob.stops[0].end_index < mob.stops[1].start_index
    assert all(s.duration >= 6.0 for s in mob.stops)


def test_short_pause_is_not_a_stop():
    pts = [(i, 0, 0) for i in range(5)] + [(4, 0, 0)] * 2 + [(5 + i, 0, 0) for i in range(5)]
    assert mobility_stats(make_track(pts)).stops == ()


def test_speeds_do_not_cross_breaks():
    tr = make_track([(0, 0, 0), (0, 0, 0), (5, 0, 0), (5, 0, 0)], breaks=(2,))
    assert sample_speeds(tr).tolist() == [0.0, 0.0, 0.0, 0.0]
    assert mobility_stats(tr).path_length == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, TAU), st.floats(-20, 20), st.floats(-20, 20))
def test_path_length_rigid_invariance(seed, rot, dx, dy):
    tr = random_track(random.Random(seed), 30)
    c, s = math.cos(rot), math.sin(rot)
    moved = make_track([(c * p.x - s * p.y + dx, s * p.x + c * p.y + dy, p.heading) for p in tr.samples])
    assert mobility_stats(moved).path_length == pytest.approx(mobility_stats(tr).path_length, abs=1e-9)


# -- temporal ------------------------------------------------------------------

def test_temporal_whole_room_zone():
    room = ClassroomMap(9.0, 7.0, (), (Zone("all", ((0, 0), (9, 0), (9, 7), (0, 7))),))
    interior = random_track(random.Random(4), 50, width=8.99, height=6.99)
    tz = temporal_zone_occupancy(interior, room, 5)
    assert tz.zones == ("all", ELSEWHERE)
    assert not tz.values[1].any()
    # the far walls are outside the half-open zone, as for occupancy cells
    edge = make_track([(9.0, 3.0, 0), (4.0, 7.0, 0), (0.0, 0.0, 0)])
    assert temporal_zone_occupancy(edge, room, 1).values[:, 0].tolist() == [2.0, 4.0]


def test_temporal_no_zones():
    tz = temporal_zone_occupancy(random_track(random.Random(4), 50), ROOM, 5)
    assert tz.zones == (ELSEWHERE,)
    assert tz.values.sum() == 100.0


def test_temporal_first_zone_wins():
    overlap = ClassroomMap(10, 8, (), (Zone("a", ((0, 0), (6, 0), (6, 8), (0, 8))), Zone("b", ((4, 0), (10, 0), (10, 8), (4, 8)))))
    tz = temporal_zone_occupancy(make_track([(5, 4, 0)] * 4), overlap, 2)
    assert tz.values[0].sum() == 8.0 and tz.values[1].sum() == 0.0


def test_temporal_column_sums():
    tr = make_track([(1, 1, 0)] * 11)
    tz = temporal_zone_occupancy(tr, ROOM, 4)
    # bins over [0, 20]: [0,5) [5,10) [10,15) [15,20]
    assert tz.values[-1].tolist() == [6.0, 4.0, 6.0, 6.0]
    assert tz.bin_edges == (0.0, 5.0, 10.0, 15.0, 20.0)


# -- conservation and report ---------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 80), st.integers(1, 20))
def test_conservation(seed, n, bins):
    room = ClassroomMap(9.0, 7.0, (), (Zone("front", ((0, 4), (9, 4), (9, 7), (0, 7))),))
    tr = random_track(random.Random(seed), n)
    total = n * tr.interval
    occ = occupancy_grid(tr, room)
    assert occ.values.sum() + occ.overflow == pytest.approx(total, abs=1e-6)
    assert heading_histogram(tr, bins).values.sum() == pytest.approx(total, abs=1e-6)
    assert temporal_zone_occupancy(tr, room, bins).values.sum() == pytest.approx(total, abs=1e-6)


def test_report_keys(room):
    rep = metrics_report(random_track(random.Random(0), 20, 10, 8), room)
    assert set(rep) == {"session", "occupancy", "attention", "histogram", "mobility", "temporal"}
    assert rep["occupancy"]["rows"] == 16 and rep["occupancy"]["cols"] == 20
    assert rep["attention"]["cone"] == {"range_m": 3.0, "half_angle_deg": pytest.approx(60.0)}
    assert rep["temporal"]["zones"] == ["left", "right", ELSEWHERE]
