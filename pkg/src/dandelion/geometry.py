"""Spotlight triangles, trajectory polylines and the world-to-screen transform."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams
from .ingest import ClassroomMap, Point, Track, TrackSample

DEFAULT_LENGTH = 0.8
DEFAULT_HALF_ANGLE = math.radians(25.0)

RGBA = tuple[int, int, int, int]


@dataclass(frozen=True)
class SpotlightParams:
    """``length`` is the apex-to-base-vertex distance (m); ``half_angle`` is
    half the apex angle (rad)."""

    length: float = DEFAULT_LENGTH
    half_angle: float = DEFAULT_HALF_ANGLE

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParams(f"spotlight length must be positive, got {self.length}")
        if not 0.0 < self.half_angle < math.pi / 2:
            raise InvalidParams(f"spotlight half angle must be in (0, pi/2), got {self.half_angle}")


@dataclass(frozen=True)
class SpotlightUnit:
    apex: Point
    base_a: Point
    base_b: Point
    color: Optional[RGBA] = None
    source_index: int = -1

    @property
    def points(self) -> tuple[Point, Point, Point]:
        return (self.apex, self.base_a, self.base_b)


def spotlight_triangle(sample: TrackSample, params: SpotlightParams, source_index: int = -1) -> SpotlightUnit:
    """Triangle with its apex on the sample position, opening toward the heading.

    Both base vertices sit on the circle of radius ``params.length`` around
    the apex, at ``heading +/- half_angle``.
    """
    if not params.length > 0 or not 0.0 < params.half_angle < math.pi / 2:
        raise InvalidParams("invalid spotlight parameters")
    h, th, L = sample.heading, params.half_angle, params.length
    x, y = sample.x, sample.y
    base_a = (x + L * math.cos(h + th), y + L * math.sin(h + th))
    base_b = (x + L * math.cos(h - th), y + L * math.sin(h - th))
    return SpotlightUnit((x, y), base_a, base_b, None, source_index)


def trajectory_polylines(track: Track) -> list[list[Point]]:
    """One polyline of sample positions per segment with at least two samples."""
    lines = []
    for a, b in track.segments():
        if b - a >= 2:
            lines.append([(s.x, s.y) for s in track.samples[a:b]])
    return lines


@dataclass(frozen=True)
class Viewport:
    """Maps the world rectangle ``(x0, y0, x1, y1)`` onto a pixel canvas.

    ``header`` adds a band of pixels above the room (used for the legend);
    ``pixel_height`` follows from the width so both axes share one scale.
    """

    world: tuple[float, float, float, float]
    pixel_width: int
    margin: int = 0
    header: int = 0

    def __post_init__(self):
        x0, y0, x1, y1 = self.world
        if not (x1 > x0 and y1 > y0):
            raise InvalidParams(f"empty world rectangle {self.world}")
        if self.pixel_width <= 2 * self.margin or self.margin < 0 or self.header < 0:
            raise InvalidParams("pixel_width must exceed twice the margin")

    @classmethod
    def for_map(cls, room: ClassroomMap, pixel_width: int, margin: int = 0, header: int = 0) -> "Viewport":
        return cls((0.0, 0.0, room.width, room.height), pixel_width, margin, header)

    @property
    def scale(self) -> float:
        x0, _, x1, _ = self.world
        return (self.pixel_width - 2 * self.margin) / (x1 - x0)

    @property
    def pixel_height(self) -> int:
        _, y0, _, y1 = self.world
        return math.ceil((y1 - y0) * self.scale - 1e-9) + 2 * self.margin + self.header


def world_to_screen(p: Point, vp: Viewport) -> Point:
    """World meters (y-up) to pixels (y-down)."""
    x0, y0 = vp.world[0], vp.world[1]
    s = vp.scale
    return (vp.margin + (p[0] - x0) * s, vp.pixel_height - vp.margin - (p[1] - y0) * s)


def world_to_screen_many(points: Sequence[Point], vp: Viewport) -> list[Point]:
    return [world_to_screen(p, vp) for p in points]


def point_in_polygon(x: float, y: float, poly: Sequence[Point]) -> bool:
    """Even-odd test with half-open crossings.

    Points on a low-coordinate edge count as inside and points on a
    high-coordinate edge as outside, so polygons that share edges tile
    without overlap.  In screen coordinates this is the top-left rule.
    """
    inside = False
    xj, yj = poly[-1]
    for xi, yi in poly:
        if (yi > y) != (yj > y):
            xint = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < xint:
                inside = not inside
        xj, yj = xi, yi
    return inside


def points_in_polygon(xs: np.ndarray, ys: np.ndarray, poly: Sequence[Point]) -> np.ndarray:
    """Vectorized :func:`point_in_polygon` over equally shaped coordinate arrays."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    xj, yj = poly[-1]
    for xi, yi in poly:
        if yi != yj:
            active = (yi > ys) != (yj > ys)
            xint = xi + (ys - yi) * (xj - xi) / (yj - yi)
            inside ^= active & (xs < xint)
        xj, yj = xi, yi
    return inside


def polygon_area(poly: Sequence[Point]) -> float:
    """Signed shoelace area (positive for counter-clockwise in y-up)."""
    acc = 0.0
    xj, yj = poly[-1]
    for xi, yi in poly:
        acc += xj * yi - xi * yj
        xj, yj = xi, yi
    return 0.5 * acc


def polygon_centroid(poly: Sequence[Point]) -> Point:
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    return (math.fsum(xs) / len(xs), math.fsum(ys) / len(ys))
