"""Command-line interface: ``dandelion {render,heatmap,metrics,simulate,validate}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.  Outputs
are written to a temporary file and renamed into place, so nothing is left
behind on failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import analytics, heatmap
from .errors import DataError, DandelionError, InvalidParams
from .geometry import Viewport
from .ingest import (
    DEFAULT_INTERVAL,
    DEFAULT_MAX_SPEED,
    parse_label_names,
    parse_map,
    parse_track,
    resample_uniform,
    serialize_map,
    serialize_track,
    validate_track,
)
from .render.color import ColorMap
from .render.scene import LEGEND_HEADER_PX, Style, build_scene, emit_svg, style_from_dict
from .simulate import LayoutKind, SimParams, simulate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
STYLE_ENV = "DANDELION_STYLE"
DEFAULT_WIDTH = 1200
MARGIN_PX = 20

DEFAULTS_TABLE = f"""\
defaults:
  resampling interval   {DEFAULT_INTERVAL:g} s (max gap 3 x interval)
  validation max speed  {DEFAULT_MAX_SPEED:g} m/s
  spotlight             length 0.8 m, half angle 25 deg, opacity 0.12
  colors                5-stop dark-to-bright time ramp; 8-color label palette
  raster                supersample 4, width {DEFAULT_WIDTH} px
  heatmap               cell 0.1 m, bandwidth 0.35 m
  metrics               cell 0.5 m, cone 3 m / 60 deg, 16 heading bins, 10 time bins,
                        stop speed 0.3 m/s, min stop 6 s
  style precedence      built-in < ${STYLE_ENV} file < --style file < flags
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _input_args(p, with_map=True):
    p.add_argument("--in", dest="track", required=True, metavar="T",
                   help="track file (.csv or .json); columns t [s], x [m], y [m], heading")
    if with_map:
        p.add_argument("--map", required=True, metavar="M", help="classroom map JSON")
    p.add_argument("--heading-unit", choices=("radians", "degrees"), default="radians",
                   help="unit of the heading column (default: %(default)s)")
    p.add_argument("--heading-offset", type=float, default=0.0, metavar="DEG",
                   help="angle added to every heading, degrees (default: %(default)s)")


def _resample_args(p):
    p.add_argument("--interval", type=float, default=DEFAULT_INTERVAL, metavar="S",
                   help="resampling step, seconds (default: %(default)s)")
    p.add_argument("--max-gap", type=float, default=None, metavar="S",
                   help="longest gap bridged by interpolation, seconds (default: 3 x interval)")


def _image_args(p):
    p.add_argument("--out", required=True, metavar="F", help="output image, .svg or .png")
    p.add_argument("--format", choices=("svg", "png"), default=None,
                   help="output format (default: from the --out extension)")
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH, metavar="PX",
                   help="image width, pixels (default: %(default)s)")
    p.add_argument("--style", metavar="S", default=None, help="style JSON file")
    p.add_argument("--workers", type=int, default=1, metavar="N",
                   help="raster worker threads (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="dandelion", description="Dandelion diagrams and proxemics metrics "
                     "from indoor position + heading tracks.", epilog=DEFAULTS_TABLE,
                     formatter_class=fmt, allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("render", help="draw a Dandelion diagram", epilog=DEFAULTS_TABLE,
                       formatter_class=fmt, allow_abbrev=False)
    _input_args(p)
    _resample_args(p)
    _image_args(p)
    p.add_argument("--coding", choices=("time", "label"), default=None,
                   help="color by session time or by activity label (default: time)")
    p.add_argument("--labels", metavar="L", default=None,
                   help='label legend JSON, e.g. {"0": "walking"} (label coding only)')

    p = sub.add_parser("heatmap", help="draw the position-only density heatmap", epilog=DEFAULTS_TABLE,
                       formatter_class=fmt, allow_abbrev=False)
    _input_args(p)
    _resample_args(p)
    _image_args(p)
    p.add_argument("--cell", type=float, default=heatmap.DEFAULT_CELL, metavar="M",
                   help="grid cell size, meters (default: %(default)s)")
    p.add_argument("--bandwidth", type=float, default=heatmap.DEFAULT_BANDWIDTH, metavar="M",
                   help="kernel standard deviation, meters (default: %(default)s)")
    p.add_argument("--grid-out", metavar="CSV", default=None,
                   help="also write the density grid as a CSV matrix (first row = top)")

    p = sub.add_parser("metrics", help="compute the proxemics metrics report", epilog=DEFAULTS_TABLE,
                       formatter_class=fmt, allow_abbrev=False)
    _input_args(p)
    _resample_args(p)
    p.add_argument("--out", required=True, metavar="R", help="report JSON path")
    p.add_argument("--cell", type=float, default=analytics.DEFAULT_CELL, metavar="M",
                   help="grid cell size, meters (default: %(default)s)")
    p.add_argument("--cone-range", type=float, default=analytics.DEFAULT_CONE_RANGE, metavar="M",
                   help="attention cone range, meters (default: %(default)s)")
    p.add_argument("--cone-angle", type=float, default=math.degrees(analytics.DEFAULT_CONE_HALF_ANGLE),
                   metavar="DEG", help="attention cone half angle, degrees (default: %(default)s)")
    p.add_argument("--bins", type=int, default=analytics.DEFAULT_HEADING_BINS, metavar="N",
                   help="heading histogram bins (default: %(default)s)")
    p.add_argument("--time-bins", type=int, default=analytics.DEFAULT_TIME_BINS, metavar="N",
                   help="session periods for the zone matrix (default: %(default)s)")
    p.add_argument("--csv-dir", metavar="DIR", default=None,
                   help="also write occupancy.csv and attention.csv matrices here")

    p = sub.add_parser("simulate", help="generate a synthetic session", epilog=DEFAULTS_TABLE,
                       formatter_class=fmt, allow_abbrev=False)
    p.add_argument("--layout", choices=("lecture", "teamwork"), required=True, help="classroom type")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default: %(default)s)")
    p.add_argument("--duration", type=float, default=3000.0, metavar="S",
                   help="session length, seconds (default: %(default)s)")
    p.add_argument("--interval", type=float, default=DEFAULT_INTERVAL, metavar="S",
                   help="sampling step, seconds (default: %(default)s)")
    p.add_argument("--walk-speed", type=float, default=0.7, metavar="MPS",
                   help="walking speed, m/s (default: %(default)s)")
    p.add_argument("--dwell-mean", type=float, default=20.0, metavar="S",
                   help="mean dwell time, seconds (default: %(default)s)")
    p.add_argument("--front-bias", type=float, default=0.5, metavar="P",
                   help="probability of visiting the board (lecture), 0..1 (default: %(default)s)")
    p.add_argument("--out", required=True, metavar="T", help="track output, .csv or .json")
    p.add_argument("--map-out", metavar="M", default=None, help="classroom map JSON output")

    p = sub.add_parser("validate", help="check a track against a map", epilog=DEFAULTS_TABLE,
                       formatter_class=fmt, allow_abbrev=False)
    _input_args(p)
    p.add_argument("--max-speed", type=float, default=DEFAULT_MAX_SPEED, metavar="MPS",
                   help="speed above which a jump is flagged, m/s (default: %(default)s)")
    return parser


# -- helpers -------------------------------------------------------------------

def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def write_atomic(path: str, data: bytes) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _track_format(path: str) -> str:
    return "json" if path.lower().endswith(".json") else "csv"


def _load_track(args):
    raw = _read(args.track)
    return parse_track(raw, _track_format(args.track), args.heading_unit, math.radians(args.heading_offset))


def _load_inputs(args):
    track = _load_track(args)
    room = parse_map(_read(args.map))
    track = resample_uniform(track, args.interval, args.max_gap)
    return track, room


def _load_style(args) -> Style:
    style = Style()
    for path in (os.environ.get(STYLE_ENV), args.style):
        if path:
            try:
                doc = json.loads(_read(path))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: invalid style JSON: {exc}") from None
            if not isinstance(doc, dict):
                raise DataError(f"{path}: style file must hold a JSON object")
            style = style_from_dict(doc, style)
    return style


def _image_format(args) -> str:
    if args.format:
        return args.format
    ext = Path(args.out).suffix.lower()
    if ext in (".svg", ".png"):
        return ext[1:]
    raise UsageError(f"cannot infer the image format from {args.out!r}; use --format")


def _encode(scene, style, fmt, workers) -> bytes:
    if fmt == "svg":
        return emit_svg(scene).encode("utf-8")
    from .render.png import encode_png
    from .render.raster import rasterize

    return encode_png(rasterize(scene, style, workers=workers))


# -- subcommands ---------------------------------------------------------------

def cmd_render(args, out: TextIO) -> int:
    fmt = _image_format(args)
    style = _load_style(args)
    if args.coding:
        style = Style(style.spotlight, style.alpha, args.coding, style.colormap,
                      style.trajectory, style.background, style.supersample)
    names = parse_label_names(_read(args.labels)) if args.labels else None
    track, room = _load_inputs(args)
    vp = Viewport.for_map(room, args.width, MARGIN_PX, LEGEND_HEADER_PX)
    scene = build_scene(track, room, style, vp, names)
    write_atomic(args.out, _encode(scene, style, fmt, args.workers))
    return EXIT_OK


def cmd_heatmap(args, out: TextIO) -> int:
    fmt = _image_format(args)
    style = _load_style(args)
    track, room = _load_inputs(args)
    grid = heatmap.kde_grid(track, room, args.cell, args.bandwidth)
    vp = Viewport.for_map(room, args.width, MARGIN_PX, LEGEND_HEADER_PX)
    cmap = style.colormap if style.colormap is not None and style.colormap.mode == "continuous" else ColorMap.continuous()
    scene = heatmap.heatmap_scene(grid, room, cmap, vp, style)
    data = _encode(scene, style, fmt, args.workers)
    if args.grid_out:
        write_atomic(args.grid_out, grid.to_csv().encode("utf-8"))
    write_atomic(args.out, data)
    return EXIT_OK


def cmd_metrics(args, out: TextIO) -> int:
    track, room = _load_inputs(args)
    report = analytics.metrics_report(
        track, room, cell_size=args.cell, cone_range=args.cone_range,
        cone_half_angle=math.radians(args.cone_angle), heading_bins=args.bins, time_bins=args.time_bins)
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        occ = analytics.occupancy_grid(track, room, args.cell)
        att = analytics.attention_grid(track, room, args.cell, args.cone_range, math.radians(args.cone_angle))
        write_atomic(os.path.join(args.csv_dir, "occupancy.csv"), occ.to_csv().encode("utf-8"))
        write_atomic(os.path.join(args.csv_dir, "attention.csv"), att.to_csv().encode("utf-8"))
    write_atomic(args.out, (json.dumps(report, indent=1) + "\n").encode("utf-8"))
    return EXIT_OK


def cmd_simulate(args, out: TextIO) -> int:
    params = SimParams(args.duration, args.interval, args.walk_speed, args.dwell_mean,
                       args.front_bias, args.seed)
    room, track = simulate(LayoutKind(args.layout), params)
    data = serialize_track(track, _track_format(args.out)).encode("utf-8")
    if args.map_out:
        write_atomic(args.map_out, serialize_map(room).encode("utf-8"))
    write_atomic(args.out, data)
    return EXIT_OK


def cmd_validate(args, out: TextIO) -> int:
    track = _load_track(args)
    room = parse_map(_read(args.map))
    issues = validate_track(track, room, args.max_speed)
    for issue in issues:
        out.write(f"{issue}\n")
    if not issues:
        out.write(f"ok: {len(track)} samples\n")
    return EXIT_DATA if issues else EXIT_OK


COMMANDS = {
    "render": cmd_render,
    "heatmap": cmd_heatmap,
    "metrics": cmd_metrics,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"dandelion {args.command}: {exc}\n")
        return EXIT_USAGE
    except InvalidParams as exc:
        stderr.write(f"dandelion {args.command}: invalid parameter: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        name = exc.filename or ""
        stderr.write(f"dandelion {args.command}: {name}: {exc.strerror or exc}\n")
        return EXIT_IO
    except (DataError, DandelionError) as exc:
        stderr.write(f"dandelion {args.command}: {exc}\n")
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
