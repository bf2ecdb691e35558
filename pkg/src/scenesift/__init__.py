"""Similar-traffic-scene retrieval from highway trajectory recordings.

The pipeline: load highD-format recordings, convert a chosen scene's
surrounding traffic into a set of 4-D context points, rank every other
scene in the dataset by Hausdorff distance to that set, and extract the
driver responses that evolve from the nearest scenes.
"""

__version__ = "0.1.0"

from .context import (
    ContextPoint,
    ContextSet,
    DEFAULT_LAMBDA,
    RelativeLane,
    SceneKey,
    extract_context_set,
    load_lane_overrides,
    relative_lane,
)
from .dataset import (
    DrivingDirection,
    Recording,
    RecordingMeta,
    SurroundingVehicles,
    TrackMeta,
    VehicleClass,
    VehicleState,
    build_recording,
    list_recording_ids,
    load_dataset,
    load_recording,
    write_recording,
)
from .metric import directed_hausdorff, hausdorff, hausdorff_bounded, hausdorff_many
from .response import (
    Axis,
    BehaviorDistribution,
    ResponseTrajectory,
    TacticalLabel,
    classify_lateral_profile,
    classify_tactical,
    estimate_density,
    extract_response,
    extract_responses,
    label_counts,
    silverman_bandwidth,
)
from .search import (
    ContextSpread,
    SearchEntry,
    SearchQuery,
    SearchResult,
    SearchStats,
    enumerate_candidates,
    read_result_json,
    search,
    spread_report,
    write_result_json,
)
from .synth import SynthConfig, generate_synthetic

__all__ = [
    "Axis",
    "BehaviorDistribution",
    "ContextPoint",
    "ContextSet",
    "ContextSpread",
    "DEFAULT_LAMBDA",
    "DrivingDirection",
    "Recording",
    "RecordingMeta",
    "RelativeLane",
    "ResponseTrajectory",
    "SceneKey",
    "SearchEntry",
    "SearchQuery",
    "SearchResult",
    "SearchStats",
    "SurroundingVehicles",
    "SynthConfig",
    "TacticalLabel",
    "TrackMeta",
    "VehicleClass",
    "VehicleState",
    "build_recording",
    "classify_lateral_profile",
    "classify_tactical",
    "directed_hausdorff",
    "enumerate_candidates",
    "estimate_density",
    "extract_context_set",
    "extract_response",
    "extract_responses",
    "generate_synthetic",
    "hausdorff",
    "hausdorff_bounded",
    "hausdorff_many",
    "label_counts",
    "list_recording_ids",
    "load_dataset",
    "load_lane_overrides",
    "load_recording",
    "read_result_json",
    "relative_lane",
    "search",
    "silverman_bandwidth",
    "spread_report",
    "write_recording",
    "write_result_json",
]
