"""Layered scene model, Dandelion scene assembly and SVG output."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union
from xml.sax.saxutils import escape

from ..errors import InvalidParams
from ..geometry import (
    SpotlightParams,
    Viewport,
    spotlight_triangle,
    trajectory_polylines,
    world_to_screen,
)
from ..ingest import ClassroomMap, Point, Track
from .color import RGB, RGBA, ColorMap, color_for, hex_rgb, to_byte

DANDELION_LAYERS = ("background", "obstacles", "spotlights", "trajectories", "legend")

LEGEND_HEADER_PX = 56


@dataclass(frozen=True)
class FillPolygon:
    points: tuple[Point, ...]
    rgba: RGBA


@dataclass(frozen=True)
class Polyline:
    points: tuple[Point, ...]
    rgba: RGBA
    width: float


@dataclass(frozen=True)
class Text:
    x: float
    y: float
    text: str
    rgba: RGBA
    size: float = 12.0
    anchor: str = "start"


Primitive = Union[FillPolygon, Polyline, Text]


@dataclass(frozen=True)
class Layer:
    name: str
    primitives: tuple[Primitive, ...] = ()


@dataclass(frozen=True)
class Scene:
    """Pixel-space primitives in back-to-front layer order over a canvas color."""

    viewport: Viewport
    layers: tuple[Layer, ...] = ()
    canvas: RGBA = (255, 255, 255, 255)

    @property
    def width(self) -> int:
        return self.viewport.pixel_width

    @property
    def height(self) -> int:
        return self.viewport.pixel_height

    def layer(self, name: str) -> Layer:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)


@dataclass(frozen=True)
class TrajectoryStroke:
    rgb: RGB = (40, 40, 40)
    width_px: float = 1.5
    opacity: float = 0.6


@dataclass(frozen=True)
class Background:
    room_fill: RGB = (255, 255, 255)
    obstacle_fill: RGB = (205, 205, 205)
    canvas: RGB = (236, 236, 236)


@dataclass(frozen=True)
class Style:
    """Rendering options.  ``colormap=None`` picks the default ramp for time
    coding and the default palette for label coding."""

    spotlight: SpotlightParams = field(default_factory=SpotlightParams)
    alpha: float = 0.12
    coding: str = "time"
    colormap: Optional[ColorMap] = None
    trajectory: TrajectoryStroke = field(default_factory=TrajectoryStroke)
    background: Background = field(default_factory=Background)
    supersample: int = 4

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidParams(f"alpha must be in (0, 1], got {self.alpha}")
        if self.coding not in ("time", "label"):
            raise InvalidParams(f"coding must be 'time' or 'label', got {self.coding!r}")
        if self.supersample not in (1, 2, 4, 8):
            raise InvalidParams(f"supersample must be 1, 2, 4 or 8, got {self.supersample}")
        if self.coding == "time" and self.colormap is not None and self.colormap.mode != "continuous":
            raise InvalidParams("time coding needs a continuous color map")

    def effective_colormap(self) -> ColorMap:
        if self.coding == "time":
            return self.colormap or ColorMap.continuous()
        if self.colormap is not None and self.colormap.mode == "categorical":
            return self.colormap
        return ColorMap.categorical()


def style_from_dict(doc: Mapping, base: Style = Style()) -> Style:
    """Overlay a style-file dictionary onto ``base``.

    Keys: ``length_m, half_angle_deg, alpha, coding, colormap{stops|palette},
    trajectory{rgb,width_px,opacity}, supersample``; stops are
    ``[{"pos": p, "rgb": [r, g, b]}, ...]``.
    """
    known = {"length_m", "half_angle_deg", "alpha", "coding", "colormap", "trajectory", "supersample", "background"}
    unknown = set(doc) - known
    if unknown:
        raise InvalidParams(f"unknown style keys: {', '.join(sorted(unknown))}")
    spot = base.spotlight
    if "length_m" in doc or "half_angle_deg" in doc:
        spot = SpotlightParams(
            float(doc.get("length_m", spot.length)),
            math.radians(float(doc["half_angle_deg"])) if "half_angle_deg" in doc else spot.half_angle,
        )
    cmap = base.colormap
    if "colormap" in doc:
        c = doc["colormap"]
        if "stops" in c:
            cmap = ColorMap.continuous([(float(s["pos"]), tuple(s["rgb"])) for s in c["stops"]])
        elif "palette" in c:
            cmap = ColorMap.categorical([tuple(p) for p in c["palette"]])
        else:
            raise InvalidParams("colormap needs 'stops' or 'palette'")
    traj = base.trajectory
    if "trajectory" in doc:
        t = doc["trajectory"]
        traj = TrajectoryStroke(
            tuple(t.get("rgb", traj.rgb)),
            float(t.get("width_px", traj.width_px)),
            float(t.get("opacity", traj.opacity)),
        )
    bg = base.background
    if "background" in doc:
        b = doc["background"]
        bg = Background(
            tuple(b.get("room_fill", bg.room_fill)),
            tuple(b.get("obstacle_fill", bg.obstacle_fill)),
            tuple(b.get("canvas", bg.canvas)),
        )
    return Style(
        spotlight=spot,
        alpha=float(doc.get("alpha", base.alpha)),
        coding=str(doc.get("coding", base.coding)),
        colormap=cmap,
        trajectory=traj,
        background=bg,
        supersample=int(doc.get("supersample", base.supersample)),
    )


# -- scene assembly ------------------------------------------------------------

def _screen(points, vp) -> tuple[Point, ...]:
    return tuple(world_to_screen(p, vp) for p in points)


def room_layers(room: ClassroomMap, style: Style, vp: Viewport, obstacle_alpha: float = 1.0) -> tuple[Layer, Layer]:
    corners = ((0.0, 0.0), (room.width, 0.0), (room.width, room.height), (0.0, room.height))
    bg = Layer("background", (FillPolygon(_screen(corners, vp), (*style.background.room_fill, 255)),))
    fill = (*style.background.obstacle_fill, to_byte(obstacle_alpha))
    obstacles = Layer("obstacles", tuple(FillPolygon(_screen(p, vp), fill) for p in room.obstacles))
    return bg, obstacles


def format_clock(seconds: float) -> str:
    total = int(round(seconds))
    return f"{total // 60}:{total % 60:02d}"


def ramp_legend(vp: Viewport, cmap: ColorMap, left: str, right: str, steps: int = 48) -> list[Primitive]:
    x0 = float(vp.margin)
    width = min(240.0, vp.pixel_width - 2.0 * vp.margin)
    top = vp.margin + 8.0
    h = 14.0
    prims: list[Primitive] = []
    for i in range(steps):
        a = x0 + width * i / steps
        b = x0 + width * (i + 1) / steps
        rgb = cmap.ramp((i + 0.5) / steps)
        prims.append(FillPolygon(((a, top), (b, top), (b, top + h), (a, top + h)), (*rgb, 255)))
    ink = (40, 40, 40, 255)
    prims.append(Text(x0, top + h + 14.0, left, ink, 12.0, "start"))
    prims.append(Text(x0 + width, top + h + 14.0, right, ink, 12.0, "end"))
    return prims


def swatch_legend(vp: Viewport, cmap: ColorMap, labels: Sequence[int],
                  names: Optional[Mapping[int, str]] = None) -> list[Primitive]:
    prims: list[Primitive] = []
    x = float(vp.margin)
    top = vp.margin + 8.0
    ink = (40, 40, 40, 255)
    for label in labels:
        rgb = cmap.pick(label)
        prims.append(FillPolygon(((x, top), (x + 14.0, top), (x + 14.0, top + 14.0), (x, top + 14.0)), (*rgb, 255)))
        name = (names or {}).get(label, f"label {label}")
        prims.append(Text(x + 18.0, top + 12.0, name, ink, 12.0, "start"))
        x += 18.0 + 8.0 * len(name) + 16.0
    return prims


def build_scene(track: Track, room: ClassroomMap, style: Style, vp: Viewport,
                label_names: Optional[Mapping[int, str]] = None) -> Scene:
    """Dandelion scene: room, obstacles, colored spotlights in time order,
    trajectory polylines and a legend."""
    bg, obstacles = room_layers(room, style, vp)
    spots = []
    for i, sample in enumerate(track.samples):
        unit = spotlight_triangle(sample, style.spotlight, i)
        spots.append(FillPolygon(_screen(unit.points, vp), color_for(sample, track, style)))
    stroke = style.trajectory
    rgba = (*stroke.rgb, to_byte(stroke.opacity))
    lines = [Polyline(_screen(line, vp), rgba, stroke.width_px) for line in trajectory_polylines(track)]

    cmap = style.effective_colormap()
    if style.coding == "time":
        legend = ramp_legend(vp, cmap, format_clock(track.samples[0].t), format_clock(track.samples[-1].t))
    else:
        labels = sorted({s.label for s in track.samples if s.label is not None})
        legend = swatch_legend(vp, cmap, labels, label_names)
    layers = (
        bg,
        obstacles,
        Layer("spotlights", tuple(spots)),
        Layer("trajectories", tuple(lines)),
        Layer("legend", tuple(legend)),
    )
    return Scene(vp, layers, (*style.background.canvas, 255))


# -- SVG -----------------------------------------------------------------------

def _num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _pts(points) -> str:
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in points)


def _opacity(a: int) -> str:
    return f"{a / 255.0:.4f}"


def emit_svg(scene: Scene) -> str:
    """Serialize a scene as an SVG 1.1 document (deterministic bytes)."""
    w, h = scene.width, scene.height
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="{hex_rgb(scene.canvas)}" fill-opacity="{_opacity(scene.canvas[3])}"/>',
    ]
    for layer in scene.layers:
        if not layer.primitives:
            continue
        out.append(f'<g id="{escape(layer.name)}">')
        for p in layer.primitives:
            if isinstance(p, FillPolygon):
                out.append(f'<polygon points="{_pts(p.points)}" fill="{hex_rgb(p.rgba)}" fill-opacity="{_opacity(p.rgba[3])}"/>')
            elif isinstance(p, Polyline):
                out.append(
                    f'<polyline points="{_pts(p.points)}" fill="none" stroke="{hex_rgb(p.rgba)}" '
                    f'stroke-opacity="{_opacity(p.rgba[3])}" stroke-width="{_num(p.width)}" '
                    f'stroke-linecap="butt" stroke-linejoin="bevel"/>')
            else:
                out.append(
                    f'<text x="{_num(p.x)}" y="{_num(p.y)}" font-family="sans-serif" font-size="{_num(p.size)}" '
                    f'fill="{hex_rgb(p.rgba)}" fill-opacity="{_opacity(p.rgba[3])}" '
                    f'text-anchor="{p.anchor}">{escape(p.text)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
