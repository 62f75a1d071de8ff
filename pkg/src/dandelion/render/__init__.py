"""Scene assembly, color coding, SVG and raster output."""
from .color import (
    DEFAULT_PALETTE,
    DEFAULT_STOPS,
    ColorMap,
    color_for,
    composite_over,
    over_unit,
    round_half_up,
    to_byte,
)
from .png import decode_png, encode_png
from .raster import RasterImage, rasterize
from .scene import (
    LEGEND_HEADER_PX,
    Background,
    FillPolygon,
    Layer,
    Polyline,
    Scene,
    Style,
    Text,
    TrajectoryStroke,
    build_scene,
    emit_svg,
    style_from_dict,
)
