"""Dandelion diagrams: spotlight-density visualization and proxemics metrics
for indoor position + heading tracks."""
from .errors import (
    DandelionError,
    DataError,
    EmptyTrack,
    ImageTooLarge,
    InvalidParams,
    LayoutFailure,
    MissingLabel,
    NonFinite,
    ParseError,
)
from .ingest import (
    ClassroomMap,
    IssueKind,
    Track,
    TrackSample,
    ValidationIssue,
    Zone,
    normalize_heading,
    parse_map,
    parse_track,
    resample_uniform,
    serialize_map,
    serialize_track,
    validate_track,
)
from .geometry import (
    SpotlightParams,
    SpotlightUnit,
    Viewport,
    spotlight_triangle,
    trajectory_polylines,
    world_to_screen,
)

__version__ = "0.1.0"
