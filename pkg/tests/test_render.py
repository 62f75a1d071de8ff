import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dandelion.errors import InvalidParams, MissingLabel
from dandelion.geometry import Viewport
from dandelion.ingest import ClassroomMap, Track, TrackSample
from dandelion.render import (
    DEFAULT_STOPS,
    ColorMap,
    FillPolygon,
    Layer,
    Polyline,
    Scene,
    Style,
    Text,
    build_scene,
    color_for,
    composite_over,
    emit_svg,
    over_unit,
    style_from_dict,
)

from conftest import make_track

SVG = "{http://www.w3.org/2000/svg}"
byte = st.integers(0, 255)
rgba = st.tuples(byte, byte, byte, byte)
unit = st.floats(0, 1)


# -- color ---------------------------------------------------------------------

def test_two_stop_midpoint_rounds_half_up():
    cmap = ColorMap.continuous([(0.0, (0, 0, 0)), (1.0, (255, 255, 255))])
    assert cmap.ramp(0.5) == (128, 128, 128)


@given(unit)
def test_ramp_stays_between_stops(u):
    rgb = ColorMap.continuous().ramp(u)
    assert all(0 <= c <= 255 for c in rgb)


def test_time_coding_endpoints_exact():
    tr = make_track([(1, 1, 0)] * 5)
    style = Style()
    assert color_for(tr.samples[0], tr, style)[:3] == DEFAULT_STOPS[0][1]
    assert color_for(tr.samples[-1], tr, style)[:3] == DEFAULT_STOPS[-1][1]
    assert color_for(tr.samples[2], tr, style)[:3] == DEFAULT_STOPS[2][1]
    assert color_for(tr.samples[0], tr, style)[3] == 31     # 0.12 * 255 = 30.6


def test_label_coding_and_missing_label():
    tr = make_track([(1, 1, 0)] * 3, labels=[0, 9, None])
    style = Style(coding="label")
    assert color_for(tr.samples[0], tr, style)[:3] == (0, 114, 178)
    assert color_for(tr.samples[1], tr, style)[:3] == (230, 159, 0)   # 9 mod 8 = 1
    with pytest.raises(MissingLabel):
        color_for(tr.samples[2], tr, style)


def test_time_coding_needs_duration():
    tr = make_track([(1, 1, 0)])
    with pytest.raises(InvalidParams):
        color_for(tr.samples[0], tr, Style())


@pytest.mark.parametrize("stops", [
    [(0.0, (0, 0, 0))],
    [(0.1, (0, 0, 0)), (1.0, (1, 1, 1))],
    [(0.0, (0, 0, 0)), (0.5, (1, 1, 1)), (0.5, (2, 2, 2)), (1.0, (3, 3, 3))],
    [(0.0, (0, 0, 0)), (1.0, (256, 0, 0))],
])
def test_bad_stops(stops):
    with pytest.raises(InvalidParams):
        ColorMap.continuous(stops)


def test_empty_palette():
    with pytest.raises(InvalidParams):
        ColorMap.categorical([])


# -- compositing ---------------------------------------------------------------

def test_over_examples():
    assert composite_over((255, 255, 255, 255), (255, 255, 255, 128)) == (255, 255, 255, 255)
    assert composite_over((0, 0, 0, 255), (255, 255, 255, 128)) == (128, 128, 128, 255)
    assert composite_over((10, 20, 30, 40), (1, 2, 3, 255)) == (1, 2, 3, 255)
    assert composite_over((10, 20, 30, 40), (1, 2, 3, 0)) == (10, 20, 30, 40)
    assert composite_over((0, 0, 0, 0), (0, 0, 0, 0)) == (0, 0, 0, 0)


def test_white_half_over_black_unit():
    out = over_unit((0.0, 0.0, 0.0, 1.0), (1.0, 1.0, 1.0, 0.5))
    assert out == (0.5, 0.5, 0.5, 1.0)


@given(rgba, rgba)
def test_identity_and_annihilation(dst, src):
    assert composite_over(dst, (*src[:3], 0)) == dst
    assert composite_over(dst, (*src[:3], 255)) == (*src[:3], 255)


@settings(max_examples=300)
@given(rgba, rgba, rgba)
def test_over_associative_after_quantization(a, b, c):
    def f(v):
        return [x / 255.0 for x in v]

    left = over_unit(over_unit(f(a), f(b)), f(c))
    right = over_unit(f(a), over_unit(f(b), f(c)))
    # colors are irrelevant when nothing is visible
    if left[3] < 1e-12 and right[3] < 1e-12:
        return
    for x, y in zip(left, right):
        assert abs(round(x * 255) - round(y * 255)) <= 1


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5])
def test_stacking_monotone(alpha):
    a8 = round(alpha * 255)
    bg = (20, 200, 60, 255)
    col = (250, 10, 120, a8)
    px = bg
    weights = []
    for _ in range(30):
        nxt = over_unit([c / 255 for c in px], [c / 255 for c in col])
        px = nxt
        # blend weight of the spotlight color, measured on channel 0
        weights.append((px[0] - bg[0] / 255) / ((col[0] - bg[0]) / 255))
        px = [c * 255 for c in px]
    assert all(b >= a - 1e-12 for a, b in zip(weights, weights[1:]))


# -- style ---------------------------------------------------------------------

def test_style_validation():
    with pytest.raises(InvalidParams):
        Style(alpha=0.0)
    with pytest.raises(InvalidParams):
        Style(alpha=1.5)
    with pytest.raises(InvalidParams):
        Style(supersample=3)
    with pytest.raises(InvalidParams):
        Style(coding="speed")


def test_style_from_dict():
    doc = {
        "length_m": 1.2,
        "half_angle_deg": 30,
        "alpha": 0.2,
        "coding": "label",
        "colormap": {"palette": [[1, 2, 3], [4, 5, 6]]},
        "trajectory": {"rgb": [9, 9, 9], "width_px": 2, "opacity": 1.0},
        "supersample": 2,
    }
    s = style_from_dict(doc)
    assert s.spotlight.length == 1.2
    assert s.spotlight.half_angle == pytest.approx(math.radians(30))
    assert s.alpha == 0.2 and s.coding == "label" and s.supersample == 2
    assert s.effective_colormap().palette == ((1, 2, 3), (4, 5, 6))
    assert s.trajectory.width_px == 2.0
    stops = style_from_dict({"colormap": {"stops": [{"pos": 0, "rgb": [0, 0, 0]}, {"pos": 1, "rgb": [9, 9, 9]}]}})
    assert stops.effective_colormap().ramp(1.0) == (9, 9, 9)


def test_style_unknown_key():
    with pytest.raises(InvalidParams):
        style_from_dict({"alhpa": 0.3})


# -- scene ---------------------------------------------------------------------

def _vp(room):
    return Viewport.for_map(room, 500, 10, 56)


def test_scene_counts(room):
    tr = make_track([(1 + 0.1 * i, 4, 0.3 * i) for i in range(12)])
    scene = build_scene(tr, room, Style(), _vp(room))
    assert [layer.name for layer in scene.layers] == ["background", "obstacles", "spotlights", "trajectories", "legend"]
    assert len(scene.layer("spotlights").primitives) == 12
    assert len(scene.layer("trajectories").primitives) == 1
    assert len(scene.layer("obstacles").primitives) == 1
    texts = [p.text for p in scene.layer("legend").primitives if isinstance(p, Text)]
    assert texts == ["0:00", "0:22"]


def test_scene_time_order(room):
    tr = make_track([(1 + 0.1 * i, 4, 0) for i in range(5)])
    spots = build_scene(tr, room, Style(), _vp(room)).layer("spotlights").primitives
    assert spots[0].rgba[:3] == DEFAULT_STOPS[0][1]
    assert spots[-1].rgba[:3] == DEFAULT_STOPS[-1][1]


def test_scene_without_obstacles(empty_room):
    tr = make_track([(1, 1, 0), (2, 2, 0)])
    scene = build_scene(tr, empty_room, Style(), _vp(empty_room))
    assert scene.layer("obstacles").primitives == ()
    ET.fromstring(emit_svg(scene))


def test_label_scene_two_colors(room):
    tr = make_track([(1 + 0.1 * i, 4, 0) for i in range(8)], labels=[0, 1] * 4)
    style = Style(coding="label", colormap=ColorMap.categorical([(255, 0, 0), (0, 0, 255)]))
    spots = build_scene(tr, room, style, _vp(room)).layer("spotlights").primitives
    assert {p.rgba[:3] for p in spots} == {(255, 0, 0), (0, 0, 255)}


def test_scene_breaks_split_trajectory(room):
    tr = make_track([(1 + 0.1 * i, 4, 0) for i in range(6)], breaks=(2, 4))
    lines = build_scene(tr, room, Style(), _vp(room)).layer("trajectories").primitives
    assert [len(p.points) for p in lines] == [2, 2, 2]


# -- SVG -----------------------------------------------------------------------

def _one_triangle_scene():
    vp = Viewport((0.0, 0.0, 10.0, 8.0), 1000)
    tri = FillPolygon(((0.0, 800.0), (86.6, 750.0), (86.6, 850.0)), (255, 0, 0, 31))
    return Scene(vp, (Layer("spotlights", (tri,)),))


def test_svg_polygon_format():
    svg = emit_svg(_one_triangle_scene())
    assert 'points="0.000,800.000 86.600,750.000 86.600,850.000"' in svg
    assert 'fill="#ff0000" fill-opacity="0.1216"' in svg


def test_svg_deterministic(room):
    tr = make_track([(1 + 0.3 * i, 4, 0.5 * i) for i in range(20)])
    a = emit_svg(build_scene(tr, room, Style(), _vp(room)))
    b = emit_svg(build_scene(tr, room, Style(), _vp(room)))
    assert a.encode() == b.encode()


def test_svg_empty_scene():
    svg = emit_svg(Scene(Viewport((0.0, 0.0, 1.0, 1.0), 10), ()))
    root = ET.fromstring(svg)
    assert root.get("version") == "1.1"
    assert [child.tag for child in root] == [SVG + "rect"]


def test_svg_structure(room):
    tr = make_track([(1 + 0.3 * i, 4, 0.5 * i) for i in range(7)])
    root = ET.fromstring(emit_svg(build_scene(tr, room, Style(), _vp(room))))
    groups = {g.get("id"): g for g in root.iter(SVG + "g")}
    assert len(groups["spotlights"].findall(SVG + "polygon")) == 7
    (line,) = groups["trajectories"].findall(SVG + "polyline")
    assert line.get("fill") == "none"
    order = [g.get("id") for g in root.iter(SVG + "g")]
    assert order == ["background", "obstacles", "spotlights", "trajectories", "legend"]


def test_svg_escapes_text():
    vp = Viewport((0.0, 0.0, 1.0, 1.0), 100)
    scene = Scene(vp, (Layer("legend", (Text(1, 2, "a<b & \"c\"", (0, 0, 0, 255)),)),))
    root = ET.fromstring(emit_svg(scene))
    assert next(root.iter(SVG + "text")).text == 'a<b & "c"'


def test_svg_negative_zero():
    vp = Viewport((0.0, 0.0, 1.0, 1.0), 100)
    scene = Scene(vp, (Layer("x", (Polyline(((-0.0001, 0.0), (1.0, 1.0)), (0, 0, 0, 255), 1.0),)),))
    assert 'points="0.000,0.000 1.000,1.000"' in emit_svg(scene)
