"""Position-only heatmap baseline: Gaussian kernel density of dwell time."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParams
from .geometry import Viewport, world_to_screen
from .ingest import ClassroomMap, Track
from .render.color import ColorMap
from .render.scene import FillPolygon, Layer, Scene, Style, ramp_legend, room_layers

DEFAULT_CELL = 0.1
DEFAULT_BANDWIDTH = 0.35


def grid_shape(room: ClassroomMap, cell_size: float) -> tuple[int, int]:
    """``(rows, cols)`` of cells tiling the room; the tolerance absorbs
    ``9 / 0.1 = 90.00000000000001``."""
    cols = max(1, math.ceil(room.width / cell_size - 1e-9))
    rows = max(1, math.ceil(room.height / cell_size - 1e-9))
    return rows, cols


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Cell values over a regular grid.

    ``values[r, c]`` belongs to the cell whose lower-left corner is
    ``origin + (c, r) * cell_size``, so row 0 is the bottom (lowest y) row.
    ``kind`` is ``"density"`` (s/m^2), ``"occupancy"`` or ``"attention"`` (s).
    """

    cell_size: float
    origin: tuple[float, float]
    values: np.ndarray
    kind: str = "density"
    overflow: float = 0.0

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center x coordinates per column and y coordinates per row."""
        x0, y0 = self.origin
        return (x0 + (np.arange(self.cols) + 0.5) * self.cell_size,
                y0 + (np.arange(self.rows) + 0.5) * self.cell_size)

    def top_down(self) -> np.ndarray:
        return self.values[::-1]

    def to_csv(self) -> str:
        """CSV matrix, first line = top row of the room."""
        out = io.StringIO()
        for row in self.top_down():
            out.write(",".join(repr(float(v)) for v in row) + "\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "cell_size": self.cell_size,
            "origin": list(self.origin),
            "cols": self.cols,
            "rows": self.rows,
            "row_order": "top-down",
            "values": [[float(v) for v in row] for row in self.top_down()],
        }
        if self.kind == "occupancy":
            d["overflow"] = self.overflow
        return d


def kde_grid(track: Track, room: ClassroomMap, cell_size: float = DEFAULT_CELL,
             bandwidth: float = DEFAULT_BANDWIDTH) -> DensityGrid:
    """Dwell-time density: each sample spreads ``interval`` seconds with an
    isotropic normal kernel, truncated at the walls without renormalization.

    Samples sharing a position are merged into one weighted kernel, which
    makes the grid exactly linear under duplication of samples.
    """
    if not cell_size > 0 or not bandwidth > 0:
        raise InvalidParams("cell_size and bandwidth must be positive")
    rows, cols = grid_shape(room, cell_size)
    grid = DensityGrid(cell_size, (0.0, 0.0), np.zeros((rows, cols)), "density")
    if len(track) == 0:
        return grid
    if track.interval is None:
        raise InvalidParams("kde_grid needs a resampled track")
    pos, counts = np.unique(track.positions, axis=0, return_counts=True)
    weights = counts * (track.interval / (2.0 * math.pi * bandwidth**2))
    cx, cy = grid.centers()
    two_var = 2.0 * bandwidth**2
    # the 2-D kernel factors into x and y parts
    gx = np.exp(-((cx[None, :] - pos[:, 0:1]) ** 2) / two_var)    # (U, cols)
    gy = np.exp(-((cy[None, :] - pos[:, 1:2]) ** 2) / two_var)    # (U, rows)
    values = (gy * weights[:, None]).T @ gx
    return DensityGrid(cell_size, (0.0, 0.0), values, "density")


def heatmap_scene(grid: DensityGrid, room: ClassroomMap, colormap: Optional[ColorMap], vp: Viewport,
                  style: Optional[Style] = None) -> Scene:
    """Opaque cell rectangles colored by ``value / max``, with obstacles
    drawn translucently on top and a min/max legend."""
    style = style or Style()
    cmap = colormap or ColorMap.continuous()
    if cmap.mode != "continuous":
        raise InvalidParams("heatmap needs a continuous color map")
    vmax = float(grid.values.max()) if grid.values.size else 0.0
    vmin = float(grid.values.min()) if grid.values.size else 0.0
    x0, y0 = grid.origin
    cells = []
    for r in range(grid.rows):
        ya = y0 + r * grid.cell_size
        yb = min(room.height, y0 + (r + 1) * grid.cell_size)
        for c in range(grid.cols):
            xa = x0 + c * grid.cell_size
            xb = min(room.width, x0 + (c + 1) * grid.cell_size)
            u = grid.values[r, c] / vmax if vmax > 0 else 0.0
            corners = ((xa, ya), (xb, ya), (xb, yb), (xa, yb))
            cells.append(FillPolygon(tuple(world_to_screen(p, vp) for p in corners), (*cmap.ramp(u), 255)))
    bg, obstacles = room_layers(room, style, vp, obstacle_alpha=0.35)
    unit = "s/m2" if grid.kind == "density" else "s"
    legend = ramp_legend(vp, cmap, f"{vmin:.3g} {unit}", f"{vmax:.3g} {unit}")
    layers = (bg, Layer("density", tuple(cells)), obstacles, Layer("legend", tuple(legend)))
    return Scene(vp, layers, (*style.background.canvas, 255))
