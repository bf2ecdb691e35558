"""Load, validate and index highD-format recordings into immutable stores.

A recording is three CSV files (``XX_recordingMeta.csv``, ``XX_tracksMeta.csv``,
``XX_tracks.csv``). Raw values are kept exactly as found in the files: y grows
downward, upper-carriageway vehicles travel in negative x, and a surrounding
vehicle id of 0 means "absent". Canonicalization into an ego-centric frame is
the job of :mod:`scenesift.context`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping, Optional

import numpy as np
import pandas as pd

from .errors import InconsistentMeta, MalformedRow, MissingFile, UnclassifiableLane, UnknownScene

# Surrounding-vehicle slot names, in the column order of the tracks file.
SLOTS = (
    "preceding",
    "following",
    "left_preceding",
    "left_alongside",
    "left_following",
    "right_preceding",
    "right_alongside",
    "right_following",
)

SLOT_COLUMNS = (
    "precedingId",
    "followingId",
    "leftPrecedingId",
    "leftAlongsideId",
    "leftFollowingId",
    "rightPrecedingId",
    "rightAlongsideId",
    "rightFollowingId",
)

REQUIRED_TRACK_COLUMNS = (
    "frame", "id", "x", "y", "width", "height",
    "xVelocity", "yVelocity", "laneId",
) + SLOT_COLUMNS

REQUIRED_TRACKS_META_COLUMNS = (
    "id", "width", "height", "initialFrame", "finalFrame", "drivingDirection", "class",
)

REQUIRED_RECORDING_META_COLUMNS = (
    "id", "frameRate", "locationId", "upperLaneMarkings", "lowerLaneMarkings",
)


class DrivingDirection(IntEnum):
    """Carriageway of a track; matches the dataset's drivingDirection column."""

    UPPER_CARRIAGEWAY = 1  # travels in negative x
    LOWER_CARRIAGEWAY = 2  # travels in positive x


class VehicleClass(Enum):
    CAR = "Car"
    TRUCK = "Truck"


def direction_sign(direction: DrivingDirection) -> float:
    """+1 for the lower carriageway (travels +x), -1 for the upper."""
    return 1.0 if direction == DrivingDirection.LOWER_CARRIAGEWAY else -1.0


@dataclass(frozen=True)
class RecordingMeta:
    recording_id: int
    frame_rate: float
    location_id: int
    upper_lane_markings: tuple[float, ...]
    lower_lane_markings: tuple[float, ...]
    duration: float


@dataclass(frozen=True)
class TrackMeta:
    vehicle_id: int
    recording_id: int
    initial_frame: int
    final_frame: int
    width: float   # longitudinal extent (dataset convention)
    height: float  # lateral extent
    driving_direction: DrivingDirection
    vehicle_class: VehicleClass


@dataclass(frozen=True)
class SurroundingVehicles:
    """The eight neighbour slots of one vehicle state; None means absent."""

    preceding: Optional[int] = None
    following: Optional[int] = None
    left_preceding: Optional[int] = None
    left_alongside: Optional[int] = None
    left_following: Optional[int] = None
    right_preceding: Optional[int] = None
    right_alongside: Optional[int] = None
    right_following: Optional[int] = None

    def present(self) -> Iterator[tuple[str, int]]:
        for slot in SLOTS:
            value = getattr(self, slot)
            if value is not None:
                yield slot, value


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: int
    frame: int
    bbox_x: float
    bbox_y: float
    center_x: float
    center_y: float
    x_velocity: float
    y_velocity: float
    lane_id: int
    surrounding: SurroundingVehicles


class Recording:
    """One recording, fully indexed and immutable after construction.

    State rows are stored column-wise in numpy arrays sorted by
    (vehicle id, frame); per-vehicle rows are contiguous and frame-contiguous,
    which makes (vehicle, frame) lookup a constant-time offset computation.
    Use :func:`build_recording` to construct instances; it runs the full
    validation suite.
    """

    def __init__(self, meta: RecordingMeta, tracks_meta: dict[int, TrackMeta],
                 columns: dict[str, np.ndarray], row_start: dict[int, int]):
        self.meta = meta
        self.tracks_meta: Mapping[int, TrackMeta] = MappingProxyType(dict(tracks_meta))
        self._ids = columns["id"]
        self._frames = columns["frame"]
        self._bbox_x = columns["x"]
        self._bbox_y = columns["y"]
        self._center_x = columns["center_x"]
        self._center_y = columns["center_y"]
        self._x_velocity = columns["xVelocity"]
        self._y_velocity = columns["yVelocity"]
        self._lane_id = columns["laneId"]
        self._surrounding = columns["surrounding"]
        self._row_start = row_start
        for arr in (self._ids, self._frames, self._bbox_x, self._bbox_y,
                    self._center_x, self._center_y, self._x_velocity,
                    self._y_velocity, self._lane_id, self._surrounding):
            arr.setflags(write=False)
        # Dense per-vehicle-id lookup tables for vectorised neighbour access.
        max_vid = max(tracks_meta) if tracks_meta else 0
        self._start_by_vid = np.full(max_vid + 1, -1, dtype=np.int64)
        self._init_by_vid = np.zeros(max_vid + 1, dtype=np.int64)
        for vid, tm in tracks_meta.items():
            self._start_by_vid[vid] = row_start[vid]
            self._init_by_vid[vid] = tm.initial_frame
        self._start_by_vid.setflags(write=False)
        self._init_by_vid.setflags(write=False)
        self.vehicle_ids: tuple[int, ...] = tuple(sorted(tracks_meta))

    # -- array views (read-only) ------------------------------------------

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def frames(self) -> np.ndarray:
        return self._frames

    @property
    def bbox_x(self) -> np.ndarray:
        return self._bbox_x

    @property
    def bbox_y(self) -> np.ndarray:
        return self._bbox_y

    @property
    def center_x(self) -> np.ndarray:
        return self._center_x

    @property
    def center_y(self) -> np.ndarray:
        return self._center_y

    @property
    def x_velocity(self) -> np.ndarray:
        return self._x_velocity

    @property
    def y_velocity(self) -> np.ndarray:
        return self._y_velocity

    @property
    def lane_ids(self) -> np.ndarray:
        return self._lane_id

    @property
    def surrounding(self) -> np.ndarray:
        """(n_states, 8) int array of neighbour ids, 0 meaning absent."""
        return self._surrounding

    @property
    def start_by_vid(self) -> np.ndarray:
        """Row index of each vehicle's first state, -1 for unused ids."""
        return self._start_by_vid

    @property
    def init_by_vid(self) -> np.ndarray:
        return self._init_by_vid

    @property
    def n_states(self) -> int:
        return len(self._ids)

    # -- lookups -----------------------------------------------------------

    def track_rows(self, vehicle_id: int) -> slice:
        tm = self.tracks_meta.get(vehicle_id)
        if tm is None:
            raise UnknownScene(f"vehicle {vehicle_id} not in recording {self.meta.recording_id}")
        start = self._row_start[vehicle_id]
        return slice(start, start + (tm.final_frame - tm.initial_frame + 1))

    def row_index(self, vehicle_id: int, frame: int) -> Optional[int]:
        tm = self.tracks_meta.get(vehicle_id)
        if tm is None or not (tm.initial_frame <= frame <= tm.final_frame):
            return None
        return self._row_start[vehicle_id] + (frame - tm.initial_frame)

    def has_state(self, vehicle_id: int, frame: int) -> bool:
        return self.row_index(vehicle_id, frame) is not None

    def state(self, vehicle_id: int, frame: int) -> VehicleState:
        row = self.row_index(vehicle_id, frame)
        if row is None:
            raise UnknownScene(
                f"vehicle {vehicle_id} has no state at frame {frame} "
                f"in recording {self.meta.recording_id}")
        raw = self._surrounding[row]
        slots = {slot: int(raw[i]) if raw[i] > 0 else None for i, slot in enumerate(SLOTS)}
        return VehicleState(
            vehicle_id=vehicle_id,
            frame=frame,
            bbox_x=float(self._bbox_x[row]),
            bbox_y=float(self._bbox_y[row]),
            center_x=float(self._center_x[row]),
            center_y=float(self._center_y[row]),
            x_velocity=float(self._x_velocity[row]),
            y_velocity=float(self._y_velocity[row]),
            lane_id=int(self._lane_id[row]),
            surrounding=SurroundingVehicles(**slots),
        )

    # -- lane geometry -----------------------------------------------------

    def lane_position(self, lane_id: int, direction: DrivingDirection) -> tuple[int, int]:
        """Map a lane id to (index from top of carriageway, lane count).

        Lane ids are global over both carriageways: ids 2..len(upper) belong
        to the upper carriageway and ids len(upper)+2 .. len(upper)+len(lower)
        to the lower one, each carriageway numbering its lanes downward.
        """
        n_upper = len(self.meta.upper_lane_markings)
        if direction == DrivingDirection.UPPER_CARRIAGEWAY:
            k = lane_id - 1
            count = n_upper - 1
        else:
            k = lane_id - n_upper - 1
            count = len(self.meta.lower_lane_markings) - 1
        if not (1 <= k <= count):
            raise UnclassifiableLane(
                f"lane id {lane_id} invalid for carriageway {direction.name} "
                f"of recording {self.meta.recording_id}")
        return k, count

    def lane_bounds(self, lane_id: int) -> tuple[float, float]:
        """Lateral interval (y_low, y_high) of a lane, inferred from its id."""
        n_upper = len(self.meta.upper_lane_markings)
        if 2 <= lane_id <= n_upper:
            marks = self.meta.upper_lane_markings
            k = lane_id - 1
        elif n_upper + 2 <= lane_id <= n_upper + len(self.meta.lower_lane_markings):
            marks = self.meta.lower_lane_markings
            k = lane_id - n_upper - 1
        else:
            raise UnclassifiableLane(
                f"lane id {lane_id} outside both carriageways of recording "
                f"{self.meta.recording_id}")
        return marks[k - 1], marks[k]


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------

def build_recording(meta: RecordingMeta, tracks_meta: dict[int, TrackMeta],
                    columns: dict[str, np.ndarray]) -> Recording:
    """Assemble and validate a Recording from raw column arrays.

    ``columns`` must contain frame, id, x, y, xVelocity, yVelocity, laneId
    (all 1-d, one entry per vehicle state) and surrounding (n, 8). Rows may
    be in any order; they are sorted here. Raises InconsistentMeta when any
    invariant fails.
    """
    _validate_meta(meta)
    for tm in tracks_meta.values():
        if tm.final_frame < tm.initial_frame:
            raise InconsistentMeta(
                f"vehicle {tm.vehicle_id}: finalFrame {tm.final_frame} before "
                f"initialFrame {tm.initial_frame}")
        if tm.width <= 0 or tm.height <= 0:
            raise InconsistentMeta(f"vehicle {tm.vehicle_id}: non-positive dimensions")

    ids = np.asarray(columns["id"], dtype=np.int64)
    frames = np.asarray(columns["frame"], dtype=np.int64)
    n = len(ids)
    order = np.lexsort((frames, ids))
    cols: dict[str, np.ndarray] = {}
    for name in ("x", "y", "xVelocity", "yVelocity"):
        arr = np.asarray(columns[name], dtype=np.float64)
        if len(arr) != n:
            raise InconsistentMeta(f"column {name} has {len(arr)} rows, expected {n}")
        cols[name] = arr[order]
    lane = np.asarray(columns["laneId"], dtype=np.int64)[order]
    surrounding = np.asarray(columns["surrounding"], dtype=np.int64)
    if surrounding.shape != (n, 8):
        raise InconsistentMeta(f"surrounding array has shape {surrounding.shape}, expected ({n}, 8)")
    surrounding = surrounding[order]
    ids = ids[order]
    frames = frames[order]

    for name in ("x", "y", "xVelocity", "yVelocity"):
        if not np.all(np.isfinite(cols[name])):
            raise InconsistentMeta(f"non-finite value in column {name}")

    known = np.zeros(int(ids.max()) + 2 if n else 1, dtype=bool)
    for vid in tracks_meta:
        if vid < len(known):
            known[vid] = True
    if n and not known[ids].all():
        bad = int(ids[~known[ids]][0])
        raise InconsistentMeta(f"track rows reference vehicle {bad} absent from tracksMeta")

    # Per-vehicle contiguity: rows of a vehicle must cover exactly
    # initialFrame..finalFrame in steps of one frame.
    row_start: dict[int, int] = {}
    if n:
        boundaries = np.flatnonzero(np.diff(ids) != 0) + 1
        starts = np.concatenate(([0], boundaries))
        ends = np.concatenate((boundaries, [n]))
        seen = set()
        for s, e in zip(starts, ends):
            vid = int(ids[s])
            seen.add(vid)
            tm = tracks_meta[vid]
            expected = tm.final_frame - tm.initial_frame + 1
            if e - s != expected or frames[s] != tm.initial_frame or frames[e - 1] != tm.final_frame:
                raise InconsistentMeta(
                    f"vehicle {vid}: rows cover frames {frames[s]}..{frames[e-1]} "
                    f"({e - s} rows) but tracksMeta declares "
                    f"{tm.initial_frame}..{tm.final_frame}")
            if expected > 1 and not np.all(np.diff(frames[s:e]) == 1):
                raise InconsistentMeta(f"vehicle {vid}: frames are not contiguous")
            row_start[vid] = int(s)
        missing = set(tracks_meta) - seen
        if missing:
            raise InconsistentMeta(f"vehicles {sorted(missing)[:5]} declared in tracksMeta have no rows")
    elif tracks_meta:
        raise InconsistentMeta("tracksMeta declares vehicles but tracks file has no rows")

    # Derived centers, using the per-vehicle dimensions from tracksMeta.
    width_by_vid = np.zeros(int(max(tracks_meta, default=0)) + 1, dtype=np.float64)
    height_by_vid = np.zeros_like(width_by_vid)
    for vid, tm in tracks_meta.items():
        width_by_vid[vid] = tm.width
        height_by_vid[vid] = tm.height
    center_x = cols["x"] + width_by_vid[ids] / 2.0 if n else np.zeros(0)
    center_y = cols["y"] + height_by_vid[ids] / 2.0 if n else np.zeros(0)

    # Every present surrounding id must have a state at the same frame.
    if n:
        frame_span = int(frames.max()) + 1
        state_keys = np.sort(ids * frame_span + frames)
        present_mask = surrounding > 0
        if present_mask.any():
            neighbor_ids = surrounding[present_mask]
            neighbor_frames = np.broadcast_to(frames[:, None], surrounding.shape)[present_mask]
            keys = neighbor_ids * frame_span + neighbor_frames
            pos = np.searchsorted(state_keys, keys)
            ok = (pos < len(state_keys)) & (state_keys[np.minimum(pos, len(state_keys) - 1)] == keys)
            if not ok.all():
                i = int(np.flatnonzero(~ok)[0])
                raise InconsistentMeta(
                    f"surrounding vehicle {int(neighbor_ids[i])} does not exist at "
                    f"frame {int(neighbor_frames[i])}")

    built = {
        "id": ids, "frame": frames, "x": cols["x"], "y": cols["y"],
        "center_x": center_x, "center_y": center_y,
        "xVelocity": cols["xVelocity"], "yVelocity": cols["yVelocity"],
        "laneId": lane, "surrounding": surrounding,
    }
    return Recording(meta, tracks_meta, built, row_start)


def _validate_meta(meta: RecordingMeta) -> None:
    if meta.frame_rate <= 0:
        raise InconsistentMeta(f"frame rate must be positive, got {meta.frame_rate}")
    for name, marks in (("upperLaneMarkings", meta.upper_lane_markings),
                        ("lowerLaneMarkings", meta.lower_lane_markings)):
        if len(marks) < 2:
            raise InconsistentMeta(f"{name} needs at least two entries, got {len(marks)}")
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise InconsistentMeta(f"{name} not strictly increasing: {marks}")


# ---------------------------------------------------------------------------
# CSV reading
# ---------------------------------------------------------------------------

def recording_paths(data_dir, recording_id: int) -> tuple[Path, Path, Path]:
    base = Path(data_dir)
    prefix = f"{recording_id:02d}"
    return (base / f"{prefix}_recordingMeta.csv",
            base / f"{prefix}_tracksMeta.csv",
            base / f"{prefix}_tracks.csv")


def list_recording_ids(data_dir) -> list[int]:
    """Recording ids for which a recordingMeta file exists in the directory."""
    out = []
    for p in sorted(Path(data_dir).glob("*_recordingMeta.csv")):
        stem = p.name.split("_")[0]
        if stem.isdigit():
            out.append(int(stem))
    return sorted(set(out))


def load_recording(data_dir, recording_id: int) -> Recording:
    """Load and fully validate one recording from its three CSV files."""
    meta_path, tracks_meta_path, tracks_path = recording_paths(data_dir, recording_id)
    for p in (meta_path, tracks_meta_path, tracks_path):
        if not p.is_file():
            raise MissingFile(str(p))
    meta = _read_recording_meta(meta_path, recording_id)
    tracks_meta = _read_tracks_meta(tracks_meta_path, recording_id)
    columns = _read_tracks(tracks_path)
    return build_recording(meta, tracks_meta, columns)


def load_dataset(data_dir, recording_ids=None) -> dict[int, Recording]:
    """Load several recordings, keyed by recording id."""
    if recording_ids is None:
        recording_ids = list_recording_ids(data_dir)
    return {rid: load_recording(data_dir, rid) for rid in recording_ids}


def _require_columns(header: list[str], required, path) -> None:
    missing = [c for c in required if c not in header]
    if missing:
        raise MalformedRow("required column missing", path=path, column=missing[0])


def _parse_markings(text: str, path, column: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in str(text).split(";") if part != "")
    except ValueError:
        raise MalformedRow("cannot parse lane markings", path=path, row=2, column=column)


def _read_recording_meta(path: Path, recording_id: int) -> RecordingMeta:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames or [], REQUIRED_RECORDING_META_COLUMNS, path)
        rows = list(reader)
    if len(rows) != 1:
        raise MalformedRow(f"expected exactly one data row, found {len(rows)}", path=path)
    row = rows[0]

    def field(name, conv):
        try:
            return conv(row[name])
        except (ValueError, TypeError):
            raise MalformedRow("cannot parse value", path=path, row=2, column=name)

    file_id = field("id", int)
    if file_id != recording_id:
        raise InconsistentMeta(f"{path} declares id {file_id}, expected {recording_id}")
    upper = _parse_markings(row["upperLaneMarkings"], path, "upperLaneMarkings")
    lower = _parse_markings(row["lowerLaneMarkings"], path, "lowerLaneMarkings")
    if "duration" in row and row["duration"] not in (None, ""):
        duration = field("duration", float)
    else:
        duration = 0.0
    return RecordingMeta(
        recording_id=file_id,
        frame_rate=field("frameRate", float),
        location_id=field("locationId", int),
        upper_lane_markings=upper,
        lower_lane_markings=lower,
        duration=duration,
    )


def _read_tracks_meta(path: Path, recording_id: int) -> dict[int, TrackMeta]:
    out: dict[int, TrackMeta] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(reader.fieldnames or [], REQUIRED_TRACKS_META_COLUMNS, path)
        for lineno, row in enumerate(reader, start=2):
            def field(name, conv):
                try:
                    return conv(row[name])
                except (ValueError, TypeError):
                    raise MalformedRow("cannot parse value", path=path, row=lineno, column=name)

            direction_raw = field("drivingDirection", int)
            try:
                direction = DrivingDirection(direction_raw)
            except ValueError:
                raise MalformedRow(f"drivingDirection must be 1 or 2, got {direction_raw}",
                                   path=path, row=lineno, column="drivingDirection")
            class_raw = str(row["class"]).strip()
            try:
                vclass = VehicleClass(class_raw)
            except ValueError:
                raise MalformedRow(f"unknown vehicle class {class_raw!r}",
                                   path=path, row=lineno, column="class")
            vid = field("id", int)
            if vid in out:
                raise InconsistentMeta(f"duplicate vehicle id {vid} in {path}")
            out[vid] = TrackMeta(
                vehicle_id=vid,
                recording_id=recording_id,
                initial_frame=field("initialFrame", int),
                final_frame=field("finalFrame", int),
                width=field("width", float),
                height=field("height", float),
                driving_direction=direction,
                vehicle_class=vclass,
            )
    return out


_TRACK_DTYPES = {
    "frame": np.int64, "id": np.int64, "laneId": np.int64,
    "x": np.float64, "y": np.float64, "width": np.float64, "height": np.float64,
    "xVelocity": np.float64, "yVelocity": np.float64,
    **{c: np.int64 for c in SLOT_COLUMNS},
}


def _read_tracks(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise MalformedRow("tracks file is empty", path=path)
    _require_columns(header, REQUIRED_TRACK_COLUMNS, path)
    try:
        frame = pd.read_csv(path, usecols=list(REQUIRED_TRACK_COLUMNS),
                            dtype=_TRACK_DTYPES)
    except (ValueError, TypeError):
        _locate_bad_cell(path)
        raise MalformedRow("unparsable tracks file", path=path)
    surrounding = np.column_stack([frame[c].to_numpy() for c in SLOT_COLUMNS]) \
        if len(frame) else np.zeros((0, 8), dtype=np.int64)
    return {
        "frame": frame["frame"].to_numpy(),
        "id": frame["id"].to_numpy(),
        "x": frame["x"].to_numpy(),
        "y": frame["y"].to_numpy(),
        "xVelocity": frame["xVelocity"].to_numpy(),
        "yVelocity": frame["yVelocity"].to_numpy(),
        "laneId": frame["laneId"].to_numpy(),
        "surrounding": surrounding,
    }


def _locate_bad_cell(path: Path) -> None:
    """Slow rescan of a tracks file that failed bulk parsing, for a precise error."""
    int_cols = {c for c, d in _TRACK_DTYPES.items() if d is np.int64}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            for col in REQUIRED_TRACK_COLUMNS:
                value = row.get(col)
                if value is None or value == "":
                    raise MalformedRow("empty cell", path=path, row=lineno, column=col)
                try:
                    int(value) if col in int_cols else float(value)
                except ValueError:
                    raise MalformedRow(f"cannot parse {value!r}", path=path,
                                       row=lineno, column=col)


# ---------------------------------------------------------------------------
# CSV writing (highD schema, deterministic)
# ---------------------------------------------------------------------------

def write_recording(recording: Recording, data_dir) -> None:
    """Write a recording to ``data_dir`` in the highD CSV schema.

    Output is deterministic and numeric cells carry two decimals, which is
    the precision the loader round-trips exactly.
    """
    base = Path(data_dir)
    base.mkdir(parents=True, exist_ok=True)
    meta_path, tracks_meta_path, tracks_path = recording_paths(base, recording.meta.recording_id)

    meta = recording.meta
    with open(meta_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "frameRate", "locationId", "upperLaneMarkings",
                         "lowerLaneMarkings", "duration"])
        writer.writerow([
            meta.recording_id,
            _fmt(meta.frame_rate),
            meta.location_id,
            ";".join(_fmt(v) for v in meta.upper_lane_markings),
            ";".join(_fmt(v) for v in meta.lower_lane_markings),
            _fmt(meta.duration),
        ])

    with open(tracks_meta_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(REQUIRED_TRACKS_META_COLUMNS))
        for vid in recording.vehicle_ids:
            tm = recording.tracks_meta[vid]
            writer.writerow([vid, _fmt(tm.width), _fmt(tm.height), tm.initial_frame,
                             tm.final_frame, int(tm.driving_direction),
                             tm.vehicle_class.value])

    with open(tracks_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(REQUIRED_TRACK_COLUMNS))
        ids = recording.ids
        frames = recording.frames
        bx = recording.bbox_x
        by = recording.bbox_y
        xv = recording.x_velocity
        yv = recording.y_velocity
        lane = recording.lane_ids
        sur = recording.surrounding
        for vid in recording.vehicle_ids:
            tm = recording.tracks_meta[vid]
            rows = recording.track_rows(vid)
            for r in range(rows.start, rows.stop):
                writer.writerow([
                    frames[r], ids[r], _fmt(bx[r]), _fmt(by[r]),
                    _fmt(tm.width), _fmt(tm.height),
                    _fmt(xv[r]), _fmt(yv[r]), lane[r],
                    *(int(v) for v in sur[r]),
                ])


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def quantize(value: float) -> float:
    """Round a value to the two-decimal precision used in the CSV schema."""
    return float(np.round(value, 2))
