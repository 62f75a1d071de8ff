"""Track and classroom-map ingestion: parsing, validation, uniform resampling.

Tracks are stored in SI units (seconds, meters) with headings in radians
normalized to ``[0, 2*pi)``.  World coordinates are y-up.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, EmptyTrack, InvalidParams, NonFinite, ParseError

TAU = 2.0 * math.pi

DEFAULT_INTERVAL = 2.0
DEFAULT_MAX_SPEED = 3.0
# Grid snapping tolerance for resampling.
TIME_EPS = 1e-9

Point = tuple[float, float]
Polygon = tuple[Point, ...]


@dataclass(frozen=True)
class TrackSample:
    t: float
    x: float
    y: float
    heading: float
    label: Optional[int] = None


@dataclass(frozen=True)
class Track:
    """Ordered samples of one tracked person.

    ``interval`` is set once the track has been resampled onto a uniform
    grid; ``segment_breaks`` holds indices of samples preceded by a gap.
    """

    samples: tuple[TrackSample, ...]
    interval: Optional[float] = None
    segment_breaks: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.samples)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([(s.x, s.y) for s in self.samples], dtype=float).reshape(-1, 2)

    @cached_property
    def headings(self) -> np.ndarray:
        return np.array([s.heading for s in self.samples], dtype=float)

    @property
    def has_labels(self) -> bool:
        return any(s.label is not None for s in self.samples)

    def segments(self) -> list[tuple[int, int]]:
        """Half-open ``(start, stop)`` index ranges between segment breaks."""
        bounds = [0, *self.segment_breaks, len(self.samples)]
        return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    @property
    def tracked_time(self) -> float:
        """Seconds represented by the samples (samples x interval)."""
        if self.interval is None:
            raise InvalidParams("track has no uniform interval; resample it first")
        return len(self.samples) * self.interval


@dataclass(frozen=True)
class Zone:
    name: str
    polygon: Polygon


@dataclass(frozen=True)
class ClassroomMap:
    """Room rectangle ``[0, width] x [0, height]`` with obstacles and zones.

    ``anchors`` holds optional named point sets (board position, desk
    centers, cluster centers) written by the layout generator and used by
    the session simulator.
    """

    width: float
    height: float
    obstacles: tuple[Polygon, ...] = ()
    zones: tuple[Zone, ...] = ()
    anchors: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DataError(f"room size must be positive, got {self.width} x {self.height}")
        polys = list(self.obstacles) + [z.polygon for z in self.zones]
        for poly in polys:
            if len(poly) < 3:
                raise DataError("polygons need at least 3 vertices")
            for x, y in poly:
                if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
                    raise DataError(f"polygon vertex ({x}, {y}) lies outside the room")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


class IssueKind(str, enum.Enum):
    OUT_OF_BOUNDS = "OutOfBounds"
    NON_FINITE = "NonFinite"
    TIME_ORDER = "TimeOrder"
    SPEED_JUMP = "SpeedJump"
    HEADING_RANGE = "HeadingRange"


@dataclass(frozen=True)
class ValidationIssue:
    kind: IssueKind
    sample_index: int
    detail: str

    def __str__(self):
        return f"{self.kind.value} @ {self.sample_index}: {self.detail}"


def normalize_heading(angle: float) -> float:
    """Wrap ``angle`` (radians) into ``[0, 2*pi)``."""
    if not math.isfinite(angle):
        raise NonFinite(f"heading is not finite: {angle!r}")
    r = math.fmod(angle, TAU)
    if r < 0.0:
        r += TAU
    # r + TAU can round up to TAU for tiny negative inputs
    if r >= TAU or r == 0.0:
        return 0.0
    return r


def shortest_arc(a: float, b: float) -> float:
    """Signed rotation from ``a`` to ``b`` along the shorter arc, in ``(-pi, pi]``."""
    d = (b - a) % TAU
    if d > math.pi:
        d -= TAU
    return d


# -- parsing -----------------------------------------------------------------

_HEADING_UNITS = ("radians", "degrees")


def _heading_to_radians(value: float, unit: str, offset: float) -> float:
    if unit == "degrees":
        value = math.radians(value)
    return normalize_heading(value + offset)


def _finite(text, record, name) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParseError(record, f"field {name!r} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(record, f"field {name!r} is not finite: {text!r}")
    return v


def _label(text, record):
    if text is None or text == "":
        return None
    try:
        if isinstance(text, bool):
            raise ValueError
        if isinstance(text, float):
            if not text.is_integer():
                raise ValueError
            return int(text)
        return int(text)
    except (TypeError, ValueError):
        raise ParseError(record, f"label is not an integer: {text!r}") from None


def parse_track(
    raw: bytes | str,
    format: str = "csv",
    heading_unit: str = "radians",
    heading_offset: float = 0.0,
) -> Track:
    """Parse a CSV or JSON track log.

    ``heading_offset`` (radians) is added to every heading after unit
    conversion, to calibrate body orientation against gaze direction.
    The returned track keeps file order and has no interval or breaks.
    """
    if heading_unit not in _HEADING_UNITS:
        raise InvalidParams(f"heading_unit must be one of {_HEADING_UNITS}")
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(0, f"input is not UTF-8: {exc}") from None
    else:
        text = raw
    if format == "csv":
        return _parse_csv(text, heading_unit, heading_offset)
    if format == "json":
        return _parse_json(text, heading_unit, heading_offset)
    raise InvalidParams(f"unknown track format {format!r}")


def _parse_csv(text, unit, offset):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(0, "missing header line")
    header = [c.strip() for c in rows[0]]
    if header not in (["t", "x", "y", "heading"], ["t", "x", "y", "heading", "label"]):
        raise ParseError(0, f"bad header {','.join(header)!r}; expected t,x,y,heading[,label]")
    samples = []
    for record, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(record, f"expected {len(header)} fields, got {len(row)}")
        vals = [c.strip() for c in row]
        t = _finite(vals[0], record, "t")
        x = _finite(vals[1], record, "x")
        y = _finite(vals[2], record, "y")
        h = _heading_to_radians(_finite(vals[3], record, "heading"), unit, offset)
        label = _label(vals[4], record) if len(vals) == 5 else None
        samples.append(TrackSample(t, x, y, h, label))
    if not samples:
        raise EmptyTrack("track file has no data rows")
    return Track(tuple(samples))


def _parse_json(text, unit, offset):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(0, f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("samples"), list):
        raise ParseError(0, "expected an object with a 'samples' list")
    samples = []
    for record, item in enumerate(doc["samples"], start=1):
        if not isinstance(item, dict):
            raise ParseError(record, "sample is not an object")
        missing = [k for k in ("t", "x", "y", "heading") if k not in item]
        if missing:
            raise ParseError(record, f"missing field(s) {', '.join(missing)}")
        t = _finite(item["t"], record, "t")
        x = _finite(item["x"], record, "x")
        y = _finite(item["y"], record, "y")
        h = _heading_to_radians(_finite(item["heading"], record, "heading"), unit, offset)
        samples.append(TrackSample(t, x, y, h, _label(item.get("label"), record)))
    if not samples:
        raise EmptyTrack("track file has no samples")
    interval = doc.get("interval")
    if interval is not None:
        interval = _finite(interval, 0, "interval")
    meta = doc.get("meta") or {}
    return Track(tuple(samples), interval=interval, meta=dict(meta))


def serialize_track(track: Track, format: str = "csv") -> str:
    """Write a track in CSV or JSON; headings are always radians."""
    labeled = track.has_labels
    if format == "csv":
        out = io.StringIO()
        out.write("t,x,y,heading,label\n" if labeled else "t,x,y,heading\n")
        for s in track.samples:
            row = [repr(float(s.t)), repr(float(s.x)), repr(float(s.y)), repr(float(s.heading))]
            if labeled:
                row.append("" if s.label is None else str(s.label))
            out.write(",".join(row) + "\n")
        return out.getvalue()
    if format == "json":
        samples = []
        for s in track.samples:
            d = {"t": s.t, "x": s.x, "y": s.y, "heading": s.heading}
            if labeled:
                d["label"] = s.label
            samples.append(d)
        doc = {"meta": track.meta, "interval": track.interval, "samples": samples}
        return json.dumps(doc, indent=1) + "\n"
    raise InvalidParams(f"unknown track format {format!r}")


# -- classroom maps ------------------------------------------------------------

def _points(seq, what) -> Polygon:
    try:
        return tuple((float(p[0]), float(p[1])) for p in seq)
    except (TypeError, ValueError, IndexError):
        raise DataError(f"{what}: expected a list of [x, y] pairs") from None


def parse_map(raw: bytes | str) -> ClassroomMap:
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"invalid map JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError("map must be a JSON object")
    try:
        width = float(doc["width"])
        height = float(doc["height"])
    except (KeyError, TypeError, ValueError):
        raise DataError("map needs numeric 'width' and 'height'") from None
    obstacles = tuple(_points(p, "obstacle") for p in doc.get("obstacles", []))
    zones = []
    for z in doc.get("zones", []):
        if not isinstance(z, dict) or "name" not in z or "polygon" not in z:
            raise DataError("zone entries need 'name' and 'polygon'")
        zones.append(Zone(str(z["name"]), _points(z["polygon"], f"zone {z['name']}")))
    anchors = {str(k): _points(v, f"anchor {k}") for k, v in doc.get("anchors", {}).items()}
    return ClassroomMap(width, height, obstacles, tuple(zones), anchors)


def serialize_map(room: ClassroomMap) -> str:
    doc = {
        "width": room.width,
        "height": room.height,
        "obstacles": [[list(p) for p in poly] for poly in room.obstacles],
        "zones": [{"name": z.name, "polygon": [list(p) for p in z.polygon]} for z in room.zones],
    }
    if room.anchors:
        doc["anchors"] = {k: [list(p) for p in v] for k, v in room.anchors.items()}
    return json.dumps(doc, indent=1) + "\n"


def parse_label_names(raw: bytes | str) -> dict[int, str]:
    """Read a label legend sidecar: ``{"0": "instruction", "1": "group work"}``."""
    try:
        doc = json.loads(raw)
        return {int(k): str(v) for k, v in doc.items()}
    except (json.JSONDecodeError, UnicodeDecodeError, AttributeError, ValueError) as exc:
        raise DataError(f"invalid label legend: {exc}") from None


# -- validation ----------------------------------------------------------------

def validate_track(
    track: Track, room: ClassroomMap, max_speed: float = DEFAULT_MAX_SPEED
) -> list[ValidationIssue]:
    """Report every data-quality violation; an empty list means clean."""
    if not track.samples:
        raise EmptyTrack("cannot validate an empty track")
    issues = []
    prev = None
    for i, s in enumerate(track.samples):
        finite = all(math.isfinite(v) for v in (s.t, s.x, s.y, s.heading))
        if not finite:
            issues.append(ValidationIssue(IssueKind.NON_FINITE, i, f"t={s.t} x={s.x} y={s.y} heading={s.heading}"))
            prev = None
            continue
        if s.t < 0:
            issues.append(ValidationIssue(IssueKind.TIME_ORDER, i, f"negative time {s.t}"))
        if not room.contains(s.x, s.y):
            issues.append(ValidationIssue(
                IssueKind.OUT_OF_BOUNDS, i,
                f"({s.x}, {s.y}) outside {room.width} x {room.height} m room"))
        if not 0.0 <= s.heading < TAU:
            issues.append(ValidationIssue(IssueKind.HEADING_RANGE, i, f"heading {s.heading} not in [0, 2pi)"))
        if prev is not None:
            dt = s.t - prev.t
            if dt <= 0:
                issues.append(ValidationIssue(IssueKind.TIME_ORDER, i, f"t={s.t} does not follow t={prev.t}"))
            else:
                speed = math.hypot(s.x - prev.x, s.y - prev.y) / dt
                if speed > max_speed:
                    issues.append(ValidationIssue(
                        IssueKind.SPEED_JUMP, i, f"{speed:.3f} m/s exceeds {max_speed} m/s"))
        prev = s
    return issues


# -- resampling ----------------------------------------------------------------

def resample_uniform(track: Track, interval: float = DEFAULT_INTERVAL,
                     max_gap: Optional[float] = None) -> Track:
    """Resample onto timestamps ``k * interval`` and split at long gaps.

    Positions are interpolated linearly and headings along the shorter arc.
    No samples are synthesized inside input gaps longer than ``max_gap``
    (default ``3 * interval``); the first sample after such a gap starts a
    new segment.  Grid points within ``1e-9`` s of an input sample copy it.
    """
    if not interval > 0:
        raise InvalidParams(f"interval must be positive, got {interval}")
    if max_gap is None:
        max_gap = 3.0 * interval
    if not max_gap >= interval:
        raise InvalidParams(f"max_gap ({max_gap}) must be >= interval ({interval})")
    if not track.samples:
        raise EmptyTrack("cannot resample an empty track")
    src = track.samples
    t = track.times
    if len(t) > 1 and not np.all(np.diff(t) > 0):
        raise DataError("sample times are not strictly increasing")

    n = len(src)
    big_gap = np.diff(t) > max_gap
    # number of long gaps preceding each input sample
    gaps_before = np.concatenate([[0], np.cumsum(big_gap)])

    k0 = math.ceil((t[0] - TIME_EPS) / interval)
    k1 = math.floor((t[-1] + TIME_EPS) / interval)
    out: list[TrackSample] = []
    gap_ids: list[int] = []
    for k in range(k0, k1 + 1):
        g = k * interval
        j = int(np.searchsorted(t, g, side="right")) - 1
        j = min(max(j, 0), n - 1)
        if abs(g - t[j]) <= TIME_EPS:
            out.append(replace(src[j], t=g))
            gap_ids.append(int(gaps_before[j]))
            continue
        if j + 1 < n and abs(t[j + 1] - g) <= TIME_EPS:
            out.append(replace(src[j + 1], t=g))
            gap_ids.append(int(gaps_before[j + 1]))
            continue
        if j + 1 >= n or g < t[j] or big_gap[j]:
            continue
        a, b = src[j], src[j + 1]
        f = (g - a.t) / (b.t - a.t)
        out.append(TrackSample(
            g,
            a.x + f * (b.x - a.x),
            a.y + f * (b.y - a.y),
            normalize_heading(a.heading + f * shortest_arc(a.heading, b.heading)),
            a.label,
        ))
        gap_ids.append(int(gaps_before[j]))
    if not out:
        raise EmptyTrack(f"no grid point of step {interval} s falls inside the track's time range")
    breaks = tuple(i for i in range(1, len(out)) if gap_ids[i] != gap_ids[i - 1])
    return Track(tuple(out), interval=float(interval), segment_breaks=breaks, meta=dict(track.meta))
