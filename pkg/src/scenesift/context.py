"""Ego-frame context sets and relative-lane classification.

A scene is one vehicle at one frame. Its context set contains one 4-D point
per present surrounding vehicle: longitudinal and lateral center offsets in
a canonical ego frame (x forward along the travel direction, y positive
toward the driver's left) concatenated with the absolute velocities along
the same axes. Lateral components are multiplied by a scaling factor so
that a lateral displacement counts as much as a ``lam``-times-larger
longitudinal one.

Raw recordings keep the dataset conventions (y down, upper carriageway in
negative x); canonicalization is a 180-degree rotation for the upper
carriageway and a y flip for the lower one, so sets from both carriageways
are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .dataset import DrivingDirection, Recording, direction_sign
from .errors import EmptyContext, MalformedRow, UnknownScene

DEFAULT_LAMBDA = 10.0


class RelativeLane(Enum):
    LEFT = "Left"
    CENTER = "Center"
    RIGHT = "Right"
    MERGING = "Merging"


@dataclass(frozen=True, order=True)
class SceneKey:
    """Identifies one traffic scene: a recording, an ego vehicle, a frame."""

    recording_id: int
    ego_id: int
    frame: int


@dataclass(frozen=True)
class ContextPoint:
    """One surrounding vehicle as a 4-D point in the scaled ego frame."""

    x: float          # longitudinal center offset, positive ahead
    y_scaled: float   # lam * lateral offset, positive toward driver's left
    vx: float         # absolute velocity along the travel axis
    vy_scaled: float  # lam * lateral velocity, positive toward driver's left
    source_vehicle_id: int


@dataclass(frozen=True)
class ContextSet:
    """Non-empty set of context points extracted from one scene."""

    key: SceneKey
    lam: float
    points: tuple[ContextPoint, ...]
    relative_lane: RelativeLane
    values: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not self.points:
            raise EmptyContext(f"context set for {self.key} has no points")
        if self.values is None:
            vals = np.array([[p.x, p.y_scaled, p.vx, p.vy_scaled] for p in self.points],
                            dtype=np.float64)
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_values(cls, values, lam: float = DEFAULT_LAMBDA,
                    key: SceneKey = SceneKey(0, 0, 0),
                    relative_lane: RelativeLane = RelativeLane.RIGHT) -> "ContextSet":
        """Build a set directly from an (n, 4) array of scaled coordinates."""
        arr = np.asarray(values, dtype=np.float64)
        points = tuple(ContextPoint(float(r[0]), float(r[1]), float(r[2]), float(r[3]), i)
                       for i, r in enumerate(arr))
        return cls(key=key, lam=lam, points=points, relative_lane=relative_lane)


LaneOverrides = Mapping[tuple[int, int], RelativeLane]


def load_lane_overrides(path) -> dict[tuple[int, int], RelativeLane]:
    """Parse a lane-override table.

    Plain text, one mapping per line: ``location_id lane_id relative_lane``,
    whitespace separated; ``#`` starts a comment.
    """
    overrides: dict[tuple[int, int], RelativeLane] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedRow("expected 'location_id lane_id relative_lane'",
                               path=path, row=lineno)
        try:
            location_id = int(parts[0])
            lane_id = int(parts[1])
            lane = RelativeLane(parts[2])
        except ValueError:
            raise MalformedRow(f"cannot parse override {line!r}", path=path, row=lineno)
        overrides[(location_id, lane_id)] = lane
    return overrides


def relative_lane(recording: Recording, vehicle_id: int, frame: int,
                  overrides: Optional[LaneOverrides] = None) -> RelativeLane:
    """Classify the lane a vehicle occupies at a frame within its carriageway.

    The lane adjacent to the median is Left, the outermost through lane is
    Right, anything between is Center. Merging lanes are not derivable from
    the lane markings, so they come exclusively from the override table;
    without an override no lane is classified Merging.
    """
    state = recording.state(vehicle_id, frame)
    tm = recording.tracks_meta[vehicle_id]
    if overrides:
        forced = overrides.get((recording.meta.location_id, state.lane_id))
        if forced is not None:
            return forced
    return classify_lane_id(recording, state.lane_id, tm.driving_direction)


def classify_lane_id(recording: Recording, lane_id: int,
                     direction: DrivingDirection) -> RelativeLane:
    k, count = recording.lane_position(lane_id, direction)
    # Rank 0 is the lane nearest the median. Lanes are numbered downward from
    # the top of the image; the median is below the upper carriageway and
    # above the lower one.
    if direction == DrivingDirection.UPPER_CARRIAGEWAY:
        rank = count - k
    else:
        rank = k - 1
    if rank == count - 1:
        return RelativeLane.RIGHT
    if rank == 0:
        return RelativeLane.LEFT
    return RelativeLane.CENTER


def lane_code_table(recording: Recording, overrides: Optional[LaneOverrides] = None) -> np.ndarray:
    """Dense lane_id -> RelativeLane code map for vectorised filtering.

    Codes index ``LANE_CODES``; -1 marks ids that classify as nothing.
    """
    n_upper = len(recording.meta.upper_lane_markings)
    n_lower = len(recording.meta.lower_lane_markings)
    max_lane = n_upper + n_lower
    table = np.full(max_lane + 2, -1, dtype=np.int8)
    for lane_id in range(2, n_upper + 1):
        table[lane_id] = LANE_CODES.index(
            classify_lane_id(recording, lane_id, DrivingDirection.UPPER_CARRIAGEWAY))
    for lane_id in range(n_upper + 2, n_upper + n_lower + 1):
        table[lane_id] = LANE_CODES.index(
            classify_lane_id(recording, lane_id, DrivingDirection.LOWER_CARRIAGEWAY))
    if overrides:
        for (location_id, lane_id), lane in overrides.items():
            if location_id == recording.meta.location_id and 0 <= lane_id < len(table):
                table[lane_id] = LANE_CODES.index(lane)
    table.setflags(write=False)
    return table


LANE_CODES = (RelativeLane.LEFT, RelativeLane.CENTER, RelativeLane.RIGHT, RelativeLane.MERGING)


def extract_context_set(recording: Recording, key: SceneKey,
                        lam: float = DEFAULT_LAMBDA, include_ego: bool = False,
                        overrides: Optional[LaneOverrides] = None) -> ContextSet:
    """Extract the scaled ego-frame context set of one scene.

    One point per present surrounding slot; optionally one extra point for
    the ego vehicle itself, placed at the origin with its own velocity.
    Raises EmptyContext when there is no surrounding vehicle and the ego
    point was not requested.
    """
    if lam <= 0:
        raise ValueError(f"lateral scaling must be positive, got {lam}")
    if key.recording_id != recording.meta.recording_id:
        raise UnknownScene(
            f"scene {key} queried against recording {recording.meta.recording_id}")
    ego = recording.state(key.ego_id, key.frame)
    tm = recording.tracks_meta[key.ego_id]
    sigma = direction_sign(tm.driving_direction)

    points = []
    for slot, neighbor_id in ego.surrounding.present():
        other = recording.state(neighbor_id, key.frame)
        x = sigma * (other.center_x - ego.center_x)
        y = -sigma * (other.center_y - ego.center_y)
        vx = sigma * other.x_velocity
        vy = -sigma * other.y_velocity
        points.append(ContextPoint(x, lam * y, vx, lam * vy, neighbor_id))
    if include_ego:
        points.append(ContextPoint(0.0, 0.0, sigma * ego.x_velocity,
                                   lam * (-sigma * ego.y_velocity), key.ego_id))
    if not points:
        raise EmptyContext(f"scene {key} has no surrounding vehicles")
    lane = relative_lane(recording, key.ego_id, key.frame, overrides)
    return ContextSet(key=key, lam=lam, points=tuple(points), relative_lane=lane)


def unscaled_point(point: ContextPoint, lam: float) -> tuple[float, float, float, float]:
    """Recover the unscaled (x, y, vx, vy) coordinates of a context point."""
    return point.x, point.y_scaled / lam, point.vx, point.vy_scaled / lam
