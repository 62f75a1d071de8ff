"""Deterministic classroom layouts and synthetic teacher sessions.

All randomness comes from one SplitMix64 stream.  When a layout and a
session are generated together, the layout draws first, then per visit the
session draws the waypoint choice followed by the dwell time.

The generative model is a stand-in for real tracking logs: a waypoint
loop with straight walks and exponentially distributed dwells.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

from .errors import InvalidParams, LayoutFailure
from .geometry import polygon_centroid
from .ingest import ClassroomMap, Point, Track, TrackSample, Zone, normalize_heading

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

ROOM_W, ROOM_H = 9.0, 7.0
DESK_W, DESK_D = 0.6, 0.5
MAX_ATTEMPTS = 10_000

# activity codes written to the label column
WALKING, AT_BOARD, WITH_STUDENTS = 0, 1, 2
ACTIVITY_NAMES = {WALKING: "walking", AT_BOARD: "at board", WITH_STUDENTS: "with students"}


def splitmix_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def uniform01(value: int) -> float:
    """Top 53 bits as a float in ``[0, 1)``."""
    return (value >> 11) * 2.0**-53


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, value = splitmix_next(self.state)
        return value

    def uniform(self) -> float:
        return uniform01(self.next_u64())

    def below(self, n: int) -> int:
        """Uniform index in ``range(n)``."""
        return min(int(self.uniform() * n), n - 1)


class LayoutKind(str, enum.Enum):
    LECTURE = "lecture"
    TEAMWORK = "teamwork"


def _rect(cx, cy, w, d, angle=0.0):
    """Rectangle centered at (cx, cy); ``w`` along ``angle``, ``d`` across it."""
    ux, uy = math.cos(angle), math.sin(angle)
    vx, vy = -uy, ux
    corners = []
    for sw, sd in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        corners.append((cx + sw * w / 2 * ux + sd * d / 2 * vx, cy + sw * w / 2 * uy + sd * d / 2 * vy))
    return tuple(corners)


def thirds(width: float, height: float) -> tuple[Zone, ...]:
    """``front`` / ``middle`` / ``back`` horizontal bands; the board is at y = height."""
    a, b = height / 3.0, 2.0 * height / 3.0

    def band(y0, y1):
        return ((0.0, y0), (width, y0), (width, y1), (0.0, y1))

    return (Zone("front", band(b, height)), Zone("middle", band(a, b)), Zone("back", band(0.0, a)))


def _lecture_layout() -> ClassroomMap:
    desks, centers, stands = [], [], []
    for i in range(4):            # rows, back (i = 0) to front
        for j in range(6):        # columns, left to right
            cx = ROOM_W / 2 + (j - 2.5) * 1.3
            cy = 1.0 + i * 1.2
            desks.append(_rect(cx, cy, DESK_W, DESK_D))
            centers.append((cx, cy))
            stands.append((cx, cy + 0.45))
    board = ((2.5, 6.85), (6.5, 6.85), (6.5, ROOM_H), (2.5, ROOM_H))
    anchors = {"board": ((ROOM_W / 2, 6.1),), "desks": tuple(centers), "stands": tuple(stands),
               "start": ((ROOM_W / 2, 6.1),)}
    return ClassroomMap(ROOM_W, ROOM_H, tuple(desks) + (board,), thirds(ROOM_W, ROOM_H), anchors)


def _teamwork_layout(rng: SplitMix64) -> ClassroomMap:
    wall, min_dist, n_clusters = 1.2, 2.0, 4
    clusters: list[Point] = []
    attempts = 0
    while len(clusters) < n_clusters:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise LayoutFailure(f"could not place {n_clusters} clusters in {MAX_ATTEMPTS} attempts")
        x = wall + rng.uniform() * (ROOM_W - 2 * wall)
        y = wall + rng.uniform() * (ROOM_H - 2 * wall)
        if all(math.hypot(x - cx, y - cy) >= min_dist for cx, cy in clusters):
            clusters.append((x, y))
    desks, centers = [], []
    for cx, cy in clusters:
        phase = rng.uniform() * 2.0 * math.pi
        for k in range(5):
            a = phase + 2.0 * math.pi * k / 5
            dx, dy = cx + 0.7 * math.cos(a), cy + 0.7 * math.sin(a)
            desks.append(_rect(dx, dy, DESK_W, DESK_D, a + math.pi / 2))
            centers.append((dx, dy))
    anchors = {"desks": tuple(centers), "stands": tuple(clusters), "start": ((ROOM_W / 2, ROOM_H / 2),)}
    return ClassroomMap(ROOM_W, ROOM_H, tuple(desks), thirds(ROOM_W, ROOM_H), anchors)


def make_layout(kind: Union[LayoutKind, str], seed: Union[int, SplitMix64] = 0) -> ClassroomMap:
    """9 x 7 m classroom: a 4 x 6 desk matrix with a board (lecture), or four
    five-desk clusters at random positions (teamwork).

    ``seed`` may be an existing generator, to share one stream with the
    session that follows.
    """
    kind = LayoutKind(kind)
    if kind is LayoutKind.LECTURE:
        return _lecture_layout()
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    return _teamwork_layout(rng)


@dataclass(frozen=True)
class SimParams:
    duration: float = 3000.0
    interval: float = 2.0
    walk_speed: float = 0.7
    dwell_mean: float = 20.0
    front_bias: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("duration", "interval", "walk_speed", "dwell_mean"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.front_bias <= 1.0:
            raise InvalidParams(f"front_bias must be in [0, 1], got {self.front_bias}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidParams("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class _Leg:
    t0: float
    t1: float
    p0: Point
    p1: Point
    heading: float
    label: int


def _nearest(p: Point, points) -> Point:
    best, best_d = points[0], math.inf
    for q in points:
        d = math.hypot(q[0] - p[0], q[1] - p[1])
        if d < best_d:
            best, best_d = q, d
    return best


def _clamp(p: Point, room: ClassroomMap) -> Point:
    return (min(max(p[0], 0.0), room.width), min(max(p[1], 0.0), room.height))


def _anchors(room: ClassroomMap):
    desks = room.anchors.get("desks") or tuple(polygon_centroid(p) for p in room.obstacles)
    if not desks:
        desks = ((room.width / 2, room.height / 2),)
    stands = room.anchors.get("stands") or desks
    board = (room.anchors.get("board") or ((room.width / 2, room.height - 0.8),))[0]
    start = (room.anchors.get("start") or ((room.width / 2, room.height / 2),))[0]
    return desks, stands, board, start


def plan_legs(room: ClassroomMap, kind: Union[LayoutKind, str], params: SimParams,
              rng: Optional[SplitMix64] = None) -> list[_Leg]:
    """Walk and dwell legs covering ``[0, duration]``."""
    kind = LayoutKind(kind)
    rng = rng or SplitMix64(params.seed)
    desks, stands, board, pos = _anchors(room)
    pos = _clamp(pos, room)
    legs: list[_Leg] = []
    t = 0.0
    while t <= params.duration:
        if kind is LayoutKind.LECTURE and rng.uniform() < params.front_bias:
            target, label = board, AT_BOARD
        else:
            target, label = stands[rng.below(len(stands))], WITH_STUDENTS
        target = _clamp(target, room)
        dwell = -params.dwell_mean * math.log(1.0 - rng.uniform())
        dist = math.hypot(target[0] - pos[0], target[1] - pos[1])
        if dist > 0.0:
            heading = normalize_heading(math.atan2(target[1] - pos[1], target[0] - pos[0]))
            t_end = t + dist / params.walk_speed
            legs.append(_Leg(t, t_end, pos, target, heading, WALKING))
            t = t_end
        desk = _nearest(target, desks)
        face = normalize_heading(math.atan2(desk[1] - target[1], desk[0] - target[0]))
        legs.append(_Leg(t, t + dwell, target, target, face, label))
        t += dwell
        pos = target
    return legs


def simulate_session(room: ClassroomMap, kind: Union[LayoutKind, str], params: SimParams,
                     rng: Optional[SplitMix64] = None) -> Track:
    """Sample the planned legs every ``interval`` seconds from 0 to ``duration``.

    Labels carry the activity code (walking / at board / with students).
    """
    kind = LayoutKind(kind)
    legs = plan_legs(room, kind, params, rng)
    n = int(math.floor(params.duration / params.interval + 1e-9))
    samples = []
    li = 0
    for k in range(n + 1):
        t = k * params.interval
        while li + 1 < len(legs) and legs[li].t1 <= t:
            li += 1
        leg = legs[li]
        if leg.t1 > leg.t0 and leg.p0 != leg.p1:
            f = min(1.0, max(0.0, (t - leg.t0) / (leg.t1 - leg.t0)))
            p = (leg.p0[0] + (leg.p1[0] - leg.p0[0]) * f, leg.p0[1] + (leg.p1[1] - leg.p0[1]) * f)
        else:
            p = leg.p0
        x, y = _clamp(p, room)
        samples.append(TrackSample(t, x, y, leg.heading, leg.label))
    meta = {
        "session_id": f"{kind.value}-seed{params.seed}",
        "subject_id": "teacher",
        "session_duration": params.duration,
    }
    return Track(tuple(samples), interval=float(params.interval), meta=meta)


def simulate(kind: Union[LayoutKind, str], params: SimParams) -> tuple[ClassroomMap, Track]:
    """Layout and session from one stream seeded with ``params.seed``."""
    rng = SplitMix64(params.seed)
    room = make_layout(kind, rng)
    return room, simulate_session(room, kind, params, rng)
