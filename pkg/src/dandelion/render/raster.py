"""Supersampled scanline rasterizer.

Every pixel is split into ``ss x ss`` sub-samples at sub-pixel centers.  A
sub-sample is covered by a polygon when its center passes the even-odd test
of :func:`dandelion.geometry.point_in_polygon` (top-left tie rule).
Primitives are blended back-to-front with source-over per sub-sample, and
each pixel is the mean of its sub-samples, quantized half up.

The canvas is processed in horizontal bands of pixel rows.  Bands are
independent, so the ``workers`` option cannot change the output.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from ..errors import ImageTooLarge, InvalidParams
from .scene import FillPolygon, Polyline, Scene

MAX_PIXELS = 10**8


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Row-major 8-bit straight-alpha RGBA, ``pixels.shape == (height, width, 4)``."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 4) or self.pixels.dtype != np.uint8:
            raise InvalidParams("pixel buffer must be uint8 of shape (height, width, 4)")

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and np.array_equal(self.pixels, other.pixels)

    def pixel(self, x: int, y: int) -> tuple[int, int, int, int]:
        return tuple(int(c) for c in self.pixels[y, x])


def _stroke_quads(points, width):
    half = 0.5 * width
    quads = []
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        dx, dy = x1 - x0, y1 - y0
        length = math.hypot(dx, dy)
        if length == 0.0:
            continue
        nx, ny = -dy / length * half, dx / length * half
        quads.append(((x0 + nx, y0 + ny), (x1 + nx, y1 + ny), (x1 - nx, y1 - ny), (x0 - nx, y0 - ny)))
    return quads


class _Shapes:
    """Scene primitives flattened into arrays for the band kernel.

    A shape is one or more polygons painted as a union with one color
    (strokes are unions of per-segment quads).
    """

    def __init__(self, scene: Scene):
        verts, poly_start, shape_poly, premul, alpha, bbox = [], [0], [0], [], [], []
        for layer in scene.layers:
            for p in layer.primitives:
                if isinstance(p, FillPolygon):
                    polys = [p.points]
                elif isinstance(p, Polyline):
                    polys = _stroke_quads(p.points, p.width)
                else:
                    continue  # text is SVG-only
                if not polys or p.rgba[3] == 0:
                    continue
                for poly in polys:
                    verts.extend(poly)
                    poly_start.append(len(verts))
                shape_poly.append(len(poly_start) - 1)
                a = p.rgba[3] / 255.0
                premul.append([p.rgba[0] / 255.0 * a, p.rgba[1] / 255.0 * a, p.rgba[2] / 255.0 * a, a])
                alpha.append(a)
                xs = [x for poly in polys for x, _ in poly]
                ys = [y for poly in polys for _, y in poly]
                bbox.append((min(xs), min(ys), max(xs), max(ys)))
        self.verts = np.array(verts, dtype=np.float64).reshape(-1, 2)
        self.poly_start = np.array(poly_start, dtype=np.int64)
        self.shape_poly = np.array(shape_poly, dtype=np.int64)
        self.premul = np.array(premul, dtype=np.float64).reshape(-1, 4)
        self.alpha = np.array(alpha, dtype=np.float64)
        self.bbox = np.array(bbox, dtype=np.float64).reshape(-1, 4)
        sizes = np.diff(self.poly_start)
        self.max_vertices = int(sizes.max()) if sizes.size else 1

    def __len__(self):
        return len(self.alpha)


@njit(cache=True, nogil=True)
def _first_col(k, ss):
    """Smallest sub-sample column ``c`` with center ``(c + 0.5) / ss >= k``."""
    c = np.ceil(k * ss - 0.5)
    while (c - 0.5) / ss >= k:
        c -= 1.0
    while (c + 0.5) / ss < k:
        c += 1.0
    return c


@njit(cache=True, nogil=True)
def _fill_band(buf, r_lo, ss, idx, verts, poly_start, shape_poly, premul, alpha, bbox, scratch, xints):
    rows = buf.shape[0]
    sub_w = buf.shape[1]
    for k in range(idx.size):
        s = idx[k]
        c0 = max(0, int(np.ceil(bbox[s, 0] * ss - 0.5)))
        c1 = min(sub_w, int(np.floor(bbox[s, 2] * ss - 0.5)) + 1)
        g0 = max(r_lo, int(np.ceil(bbox[s, 1] * ss - 0.5)))
        g1 = min(r_lo + rows, int(np.floor(bbox[s, 3] * ss - 0.5)) + 1)
        if c1 <= c0:
            continue
        keep = 1.0 - alpha[s]
        for g in range(g0, g1):
            y = (g + 0.5) / ss
            for c in range(c0, c1):
                scratch[c] = False
            hit = False
            for p in range(shape_poly[s], shape_poly[s + 1]):
                v0 = poly_start[p]
                v1 = poly_start[p + 1]
                m = 0
                j = v1 - 1
                for i in range(v0, v1):
                    xi = verts[i, 0]
                    yi = verts[i, 1]
                    xj = verts[j, 0]
                    yj = verts[j, 1]
                    if (yi > y) != (yj > y):
                        # same expression as geometry.point_in_polygon
                        xints[m] = xi + (y - yi) * (xj - xi) / (yj - yi)
                        m += 1
                    j = i
                for i in range(1, m):
                    v = xints[i]
                    q = i - 1
                    while q >= 0 and xints[q] > v:
                        xints[q + 1] = xints[q]
                        q -= 1
                    xints[q + 1] = v
                # parity of crossings right of x is odd exactly on [x1, x2), [x3, x4), ...
                for q in range(0, m - 1, 2):
                    lo = max(float(c0), _first_col(xints[q], ss))
                    hi = min(float(c1), _first_col(xints[q + 1], ss))
                    for c in range(int(lo), int(hi)):
                        scratch[c] = True
                        hit = True
            if hit:
                row = g - r_lo
                for c in range(c0, c1):
                    if scratch[c]:
                        for ch in range(4):
                            buf[row, c, ch] = buf[row, c, ch] * keep + premul[s, ch]


@njit(cache=True, nogil=True)
def _resolve(buf, ss, out):
    """Un-premultiply sub-samples, average each pixel's block, quantize half up."""
    n = ss * ss
    acc = np.empty(4)
    for r in range(out.shape[0]):
        for c in range(out.shape[1]):
            acc[:] = 0.0
            for i in range(r * ss, (r + 1) * ss):
                for j in range(c * ss, (c + 1) * ss):
                    a = buf[i, j, 3]
                    if a > 0.0:
                        acc[0] += buf[i, j, 0] / a
                        acc[1] += buf[i, j, 1] / a
                        acc[2] += buf[i, j, 2] / a
                        acc[3] += a
            for ch in range(4):
                v = np.floor(acc[ch] / n * 255.0 + 0.5)
                out[r, c, ch] = min(255.0, max(0.0, v))


def _render_band(shapes, idx, canvas_premul, width, row0, row1, ss):
    sub_w = width * ss
    # premultiplied: P = P_src + P_dst * (1 - a_src), equivalent to straight source-over
    buf = np.empty(((row1 - row0) * ss, sub_w, 4))
    buf[:] = canvas_premul
    if idx.size:
        _fill_band(buf, row0 * ss, ss, idx, shapes.verts, shapes.poly_start, shapes.shape_poly,
                   shapes.premul, shapes.alpha, shapes.bbox,
                   np.zeros(sub_w, dtype=np.bool_), np.empty(shapes.max_vertices + 1))
    out = np.empty((row1 - row0, width, 4), dtype=np.uint8)
    _resolve(buf, ss, out)
    return out


def rasterize(scene: Scene, style=None, *, supersample: Optional[int] = None,
              band_rows: int = 32, workers: int = 1) -> RasterImage:
    """Rasterize ``scene``; sub-sampling comes from ``supersample`` or ``style``."""
    ss = supersample if supersample is not None else (style.supersample if style is not None else 4)
    if ss not in (1, 2, 4, 8):
        raise InvalidParams(f"supersample must be 1, 2, 4 or 8, got {ss}")
    w, h = scene.width, scene.height
    if w <= 0 or h <= 0:
        raise InvalidParams(f"empty canvas {w}x{h}")
    if w * h > MAX_PIXELS:
        raise ImageTooLarge(f"{w}x{h} exceeds {MAX_PIXELS} pixels")
    shapes = _Shapes(scene)
    a = scene.canvas[3] / 255.0
    canvas = np.array([c / 255.0 * a for c in scene.canvas[:3]] + [a])
    y_lo, y_hi = shapes.bbox[:, 1], shapes.bbox[:, 3]

    def band(row0):
        row1 = min(h, row0 + band_rows)
        hit = np.nonzero((y_hi >= row0) & (y_lo <= row1))[0].astype(np.int64)
        return _render_band(shapes, hit, canvas, w, row0, row1, ss)

    starts = range(0, h, band_rows)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(band, starts))
    else:
        parts = [band(r) for r in starts]
    return RasterImage(w, h, np.concatenate(parts, axis=0))
