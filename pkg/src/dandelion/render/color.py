"""Color maps, time/label color coding and straight-alpha source-over compositing."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import InvalidParams, MissingLabel
from ..ingest import Track, TrackSample

RGB = tuple[int, int, int]
RGBA = tuple[int, int, int, int]

DEFAULT_STOPS: tuple[tuple[float, RGB], ...] = (
    (0.0, (13, 8, 135)),
    (0.25, (126, 3, 168)),
    (0.5, (204, 71, 120)),
    (0.75, (248, 149, 64)),
    (1.0, (240, 249, 33)),
)

DEFAULT_PALETTE: tuple[RGB, ...] = (
    (0, 114, 178),
    (230, 159, 0),
    (0, 158, 115),
    (204, 121, 167),
    (86, 180, 233),
    (213, 94, 0),
    (240, 228, 66),
    (0, 0, 0),
)


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def to_byte(v: float) -> int:
    """Quantize a normalized ``[0, 1]`` value to 0..255, rounding half up."""
    return min(255, max(0, round_half_up(v * 255.0)))


def _check_rgb(rgb) -> RGB:
    rgb = tuple(int(c) for c in rgb)
    if len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb):
        raise InvalidParams(f"not an 8-bit RGB triple: {rgb}")
    return rgb


@dataclass(frozen=True)
class ColorMap:
    """Either a piecewise-linear ramp (``stops``) or a discrete ``palette``."""

    mode: str = "continuous"
    stops: tuple[tuple[float, RGB], ...] = DEFAULT_STOPS
    palette: tuple[RGB, ...] = DEFAULT_PALETTE

    def __post_init__(self):
        if self.mode == "continuous":
            pos = [p for p, _ in self.stops]
            if len(pos) < 2 or pos[0] != 0.0 or pos[-1] != 1.0:
                raise InvalidParams("continuous color map needs >= 2 stops from 0 to 1")
            if any(b <= a for a, b in zip(pos, pos[1:])):
                raise InvalidParams("stop positions must be strictly increasing")
            object.__setattr__(self, "stops", tuple((float(p), _check_rgb(c)) for p, c in self.stops))
        elif self.mode == "categorical":
            if not self.palette:
                raise InvalidParams("categorical palette must not be empty")
            object.__setattr__(self, "palette", tuple(_check_rgb(c) for c in self.palette))
        else:
            raise InvalidParams(f"unknown color map mode {self.mode!r}")

    @classmethod
    def continuous(cls, stops: Sequence[tuple[float, RGB]] = DEFAULT_STOPS) -> "ColorMap":
        return cls("continuous", tuple(stops))

    @classmethod
    def categorical(cls, palette: Sequence[RGB] = DEFAULT_PALETTE) -> "ColorMap":
        return cls("categorical", palette=tuple(palette))

    def ramp(self, u: float) -> RGB:
        """Interpolate the stops at ``u`` (clamped to [0, 1]) per channel."""
        if self.mode != "continuous":
            raise InvalidParams("ramp() needs a continuous color map")
        u = min(1.0, max(0.0, u))
        pos = [p for p, _ in self.stops]
        i = min(bisect.bisect_right(pos, u) - 1, len(pos) - 2)
        (p0, c0), (p1, c1) = self.stops[i], self.stops[i + 1]
        f = (u - p0) / (p1 - p0)
        return tuple(round_half_up(a + (b - a) * f) for a, b in zip(c0, c1))

    def pick(self, label: int) -> RGB:
        if self.mode != "categorical":
            raise InvalidParams("pick() needs a categorical color map")
        return self.palette[label % len(self.palette)]


def color_for(sample: TrackSample, track: Track, style) -> RGBA:
    """Fill color of one sample's spotlight under ``style``'s coding."""
    alpha = to_byte(style.alpha)
    cmap = style.effective_colormap()
    if style.coding == "time":
        t0, t1 = track.samples[0].t, track.samples[-1].t
        if not t1 > t0:
            raise InvalidParams("time coding needs a track with positive duration")
        return (*cmap.ramp((sample.t - t0) / (t1 - t0)), alpha)
    if sample.label is None:
        raise MissingLabel(f"sample at t={sample.t} has no label")
    return (*cmap.pick(sample.label), alpha)


def over_unit(dst: Sequence[float], src: Sequence[float]) -> tuple[float, float, float, float]:
    """Source-over on normalized straight-alpha RGBA, without quantization."""
    a_s, a_d = src[3], dst[3]
    # the general formula is only exact up to rounding in these two cases
    if a_s == 0.0:
        return tuple(dst)
    if a_s == 1.0:
        return tuple(src)
    a_out = a_s + a_d * (1.0 - a_s)
    if a_out == 0.0:
        return (0.0, 0.0, 0.0, 0.0)
    rgb = [(cs * a_s + cd * a_d * (1.0 - a_s)) / a_out for cs, cd in zip(src[:3], dst[:3])]
    return (rgb[0], rgb[1], rgb[2], a_out)


def composite_over(dst: RGBA, src: RGBA) -> RGBA:
    """Blend 8-bit straight-alpha ``src`` over ``dst``; quantized half up."""
    out = over_unit([c / 255.0 for c in dst], [c / 255.0 for c in src])
    return tuple(to_byte(c) for c in out)


def hex_rgb(rgb: Sequence[int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb[:3])
