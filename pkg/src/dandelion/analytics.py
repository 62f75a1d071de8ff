"""Proxemics metrics: where the person stayed, where they faced, how they
moved, and when they were in which zone."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams
from .geometry import point_in_polygon
from .heatmap import DensityGrid, grid_shape
from .ingest import TAU, ClassroomMap, Point, Track

DEFAULT_CELL = 0.5
DEFAULT_CONE_RANGE = 3.0
DEFAULT_CONE_HALF_ANGLE = math.radians(60.0)
DEFAULT_HEADING_BINS = 16
DEFAULT_TIME_BINS = 10
DEFAULT_STOP_SPEED = 0.3
DEFAULT_MIN_STOP = 6.0

ELSEWHERE = "elsewhere"

OccupancyGrid = DensityGrid
AttentionGrid = DensityGrid


def _require_uniform(track: Track) -> float:
    if track.interval is None:
        raise InvalidParams("track must be resampled to a uniform interval first")
    return track.interval


def _check_cell(cell_size):
    if not cell_size > 0:
        raise InvalidParams(f"cell_size must be positive, got {cell_size}")


def occupancy_grid(track: Track, room: ClassroomMap, cell_size: float = DEFAULT_CELL) -> OccupancyGrid:
    """Seconds spent per cell; cells are half-open ``[lo, hi)`` on both axes.

    Samples outside ``[0, width) x [0, height)`` go to ``overflow``.
    """
    _check_cell(cell_size)
    dt = _require_uniform(track)
    rows, cols = grid_shape(room, cell_size)
    values = np.zeros((rows, cols))
    overflow = 0.0
    for s in track.samples:
        if 0.0 <= s.x < room.width and 0.0 <= s.y < room.height:
            c = min(int(math.floor(s.x / cell_size)), cols - 1)
            r = min(int(math.floor(s.y / cell_size)), rows - 1)
            values[r, c] += dt
        else:
            overflow += dt
    return DensityGrid(cell_size, (0.0, 0.0), values, "occupancy", overflow)


def in_cone(px: float, py: float, heading: float, cx: float, cy: float,
            cone_range: float, half_angle: float) -> bool:
    """Reference cone test for one sample and one cell center."""
    dx, dy = cx - px, cy - py
    if not math.sqrt(dx * dx + dy * dy) <= cone_range:
        return False
    d = (math.atan2(dy, dx) - heading) % TAU
    if d > math.pi:
        d -= TAU
    return abs(d) <= half_angle


def attention_grid(track: Track, room: ClassroomMap, cell_size: float = DEFAULT_CELL,
                   cone_range: float = DEFAULT_CONE_RANGE,
                   half_angle: float = DEFAULT_CONE_HALF_ANGLE) -> AttentionGrid:
    """Seconds during which each cell center lay inside the attention cone.

    Gives exactly the same membership decisions as :func:`in_cone`: the
    range filter and angle wrap are vectorized with identical arithmetic,
    and the bearing itself is taken from ``math.atan2``.
    """
    _check_cell(cell_size)
    if not cone_range > 0:
        raise InvalidParams(f"cone range must be positive, got {cone_range}")
    if not 0.0 < half_angle <= math.pi:
        raise InvalidParams(f"cone half angle must be in (0, pi], got {half_angle}")
    dt = _require_uniform(track)
    rows, cols = grid_shape(room, cell_size)
    cx = (np.arange(cols) + 0.5) * cell_size
    cy = (np.arange(rows) + 0.5) * cell_size
    gx, gy = np.meshgrid(cx, cy)
    gx, gy = gx.ravel(), gy.ravel()
    counts = np.zeros(rows * cols, dtype=np.int64)
    atan2 = np.frompyfunc(math.atan2, 2, 1)
    for s in track.samples:
        dx = gx - s.x
        dy = gy - s.y
        near = np.nonzero(np.sqrt(dx * dx + dy * dy) <= cone_range)[0]
        if near.size == 0:
            continue
        bearing = atan2(dy[near], dx[near]).astype(float)
        d = np.remainder(bearing - s.heading, TAU)
        d = np.where(d > math.pi, d - TAU, d)
        counts[near[np.abs(d) <= half_angle]] += 1
    return DensityGrid(cell_size, (0.0, 0.0), (counts * dt).reshape(rows, cols), "attention")


@dataclass(frozen=True)
class HeadingHistogram:
    n_bins: int
    values: np.ndarray

    def bin_edges(self) -> np.ndarray:
        return np.arange(self.n_bins + 1) * (TAU / self.n_bins)


def heading_histogram(track: Track, n_bins: int = DEFAULT_HEADING_BINS) -> HeadingHistogram:
    """Seconds per heading sector; bin ``k`` covers ``[2 pi k / n, 2 pi (k + 1) / n)``."""
    if n_bins < 1:
        raise InvalidParams(f"n_bins must be >= 1, got {n_bins}")
    dt = _require_uniform(track)
    values = np.zeros(n_bins)
    for s in track.samples:
        k = min(int(math.floor(s.heading * n_bins / TAU)), n_bins - 1)
        values[k] += dt
    return HeadingHistogram(n_bins, values)


@dataclass(frozen=True)
class Stop:
    start_index: int
    end_index: int          # inclusive
    centroid: Point
    duration: float


@dataclass(frozen=True)
class MobilityStats:
    path_length: float
    mean_speed: float
    stops: tuple[Stop, ...] = field(default_factory=tuple)


def sample_speeds(track: Track) -> np.ndarray:
    """Speed from each sample to the next one in its segment.

    The last sample of a segment repeats the previous step's speed; a
    single-sample segment gets 0.
    """
    dt = _require_uniform(track)
    speeds = np.zeros(len(track))
    pos = track.positions
    for a, b in track.segments():
        if b - a < 2:
            continue
        step = np.hypot(*(pos[a + 1:b] - pos[a:b - 1]).T) / dt
        speeds[a:b - 1] = step
        speeds[b - 1] = step[-1]
    return speeds


def mobility_stats(track: Track, stop_speed: float = DEFAULT_STOP_SPEED,
                   min_stop_duration: float = DEFAULT_MIN_STOP) -> MobilityStats:
    """Path length, mean speed, and stops (runs of slow samples).

    A stop is a maximal within-segment run of samples moving slower than
    ``stop_speed``; it counts when ``samples * interval >= min_stop_duration``.
    """
    if not stop_speed > 0 or not min_stop_duration > 0:
        raise InvalidParams("stop_speed and min_stop_duration must be positive")
    dt = _require_uniform(track)
    if len(track) == 0:
        return MobilityStats(0.0, 0.0, ())
    pos = track.positions
    steps = []
    for a, b in track.segments():
        steps.extend(np.hypot(*(pos[a + 1:b] - pos[a:b - 1]).T).tolist())
    path = math.fsum(steps)
    speeds = sample_speeds(track)
    stops = []
    for a, b in track.segments():
        i = a
        while i < b:
            if speeds[i] >= stop_speed:
                i += 1
                continue
            j = i
            while j + 1 < b and speeds[j + 1] < stop_speed:
                j += 1
            n = j - i + 1
            if n * dt >= min_stop_duration - 1e-9:
                cx = math.fsum(pos[i:j + 1, 0]) / n
                cy = math.fsum(pos[i:j + 1, 1]) / n
                stops.append(Stop(i, j, (cx, cy), n * dt))
            i = j + 1
    return MobilityStats(path, path / track.tracked_time, tuple(stops))


@dataclass(frozen=True)
class TemporalZoneMatrix:
    zones: tuple[str, ...]
    n_bins: int
    bin_edges: tuple[float, ...]
    values: np.ndarray      # (len(zones), n_bins) seconds


def zone_of(x: float, y: float, room: ClassroomMap) -> int:
    """Index of the first declared zone containing the point, else ``len(zones)``."""
    for i, z in enumerate(room.zones):
        if point_in_polygon(x, y, z.polygon):
            return i
    return len(room.zones)


def temporal_zone_occupancy(track: Track, room: ClassroomMap,
                            n_bins: int = DEFAULT_TIME_BINS) -> TemporalZoneMatrix:
    """Seconds per (zone, session period); the last period is closed."""
    if n_bins < 1:
        raise InvalidParams(f"n_bins must be >= 1, got {n_bins}")
    dt = _require_uniform(track)
    names = tuple(z.name for z in room.zones) + (ELSEWHERE,)
    values = np.zeros((len(names), n_bins))
    if len(track) == 0:
        return TemporalZoneMatrix(names, n_bins, (0.0,) * (n_bins + 1), values)
    t0, t1 = track.samples[0].t, track.samples[-1].t
    span = t1 - t0
    for s in track.samples:
        b = 0 if span <= 0 else min(int(math.floor((s.t - t0) / span * n_bins)), n_bins - 1)
        values[zone_of(s.x, s.y, room), b] += dt
    edges = tuple(t0 + span * k / n_bins for k in range(n_bins + 1))
    return TemporalZoneMatrix(names, n_bins, edges, values)


def metrics_report(track: Track, room: ClassroomMap, cell_size: float = DEFAULT_CELL,
                   cone_range: float = DEFAULT_CONE_RANGE,
                   cone_half_angle: float = DEFAULT_CONE_HALF_ANGLE,
                   heading_bins: int = DEFAULT_HEADING_BINS,
                   time_bins: int = DEFAULT_TIME_BINS,
                   stop_speed: float = DEFAULT_STOP_SPEED,
                   min_stop_duration: float = DEFAULT_MIN_STOP) -> dict:
    """All four patterns as one JSON-ready dictionary."""
    occ = occupancy_grid(track, room, cell_size)
    att = attention_grid(track, room, cell_size, cone_range, cone_half_angle)
    hist = heading_histogram(track, heading_bins)
    mob = mobility_stats(track, stop_speed, min_stop_duration)
    tz = temporal_zone_occupancy(track, room, time_bins)
    attention = att.to_dict()
    attention["cone"] = {"range_m": cone_range, "half_angle_deg": math.degrees(cone_half_angle)}
    return {
        "session": {
            "samples": len(track),
            "interval": track.interval,
            "tracked_time": track.tracked_time,
            "segments": len(track.segments()),
        },
        "occupancy": occ.to_dict(),
        "attention": attention,
        "histogram": {
            "n_bins": hist.n_bins,
            "bin_edges_rad": [float(v) for v in hist.bin_edges()],
            "values": [float(v) for v in hist.values],
        },
        "mobility": {
            "path_length": mob.path_length,
            "mean_speed": mob.mean_speed,
            "stop_speed": stop_speed,
            "min_stop_duration": min_stop_duration,
            "stops": [
                {"start_index": s.start_index, "end_index": s.end_index,
                 "centroid": list(s.centroid), "duration": s.duration}
                for s in mob.stops
            ],
        },
        "temporal": {
            "zones": list(tz.zones),
            "n_bins": tz.n_bins,
            "bin_edges": list(tz.bin_edges),
            "values": [[float(v) for v in row] for row in tz.values],
        },
    }
