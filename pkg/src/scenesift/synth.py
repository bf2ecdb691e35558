"""Deterministic synthetic recordings in the highD schema.

The generator exists so the pipeline can be exercised end to end without
licensed data. Trajectories are simple (constant speed, at most one smooth
lane change per vehicle) but the output is schema-complete: every value is
quantized to the two-decimal CSV precision before any derived quantity is
computed, so a generated recording written to disk and loaded back is
identical to the in-memory one.

Surrounding-vehicle slots are filled from the generated geometry using
nearest-in-lane rules over the same carriageway:

* same lane: nearest vehicle ahead (travel direction) is ``preceding``,
  nearest behind is ``following``; vehicles at exactly the same center are
  ignored;
* adjacent lane: a vehicle whose bounding box overlaps the ego's
  longitudinally (|dx| < half-length sum) is ``alongside``, otherwise it is
  a preceding/following candidate; the nearest candidate per slot wins;
* every distance tie is broken toward the lower vehicle id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import (
    DrivingDirection,
    Recording,
    RecordingMeta,
    TrackMeta,
    VehicleClass,
    build_recording,
    direction_sign,
    quantize,
)
from .errors import InvalidConfig

LANE_CHANGE_DURATION_S = 3.0
MEDIAN_GAP_M = 2.0
FIRST_MARKING_Y = 8.0


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of a synthetic recording."""

    lanes_per_carriageway: int = 2
    vehicle_count: int = 30
    duration_s: float = 60.0
    speed_min: float = 23.0
    speed_max: float = 33.0
    lane_change_probability: float = 0.15
    truck_fraction: float = 0.2
    frame_rate: float = 25.0
    road_length: float = 420.0
    lane_width: float = 4.0
    recording_id: int = 1
    location_id: int = 1

    def validate(self) -> None:
        if not 2 <= self.lanes_per_carriageway <= 4:
            raise InvalidConfig(f"lanes_per_carriageway must be 2..4, got {self.lanes_per_carriageway}")
        if self.vehicle_count <= 0:
            raise InvalidConfig("vehicle_count must be positive")
        if self.duration_s <= 0:
            raise InvalidConfig("duration_s must be positive")
        if self.speed_min <= 0 or self.speed_max < self.speed_min:
            raise InvalidConfig(
                f"speed range [{self.speed_min}, {self.speed_max}] is inverted or non-positive")
        if not 0.0 <= self.lane_change_probability <= 1.0:
            raise InvalidConfig("lane_change_probability must be within [0, 1]")
        if not 0.0 <= self.truck_fraction <= 1.0:
            raise InvalidConfig("truck_fraction must be within [0, 1]")
        if self.frame_rate <= 0 or self.road_length <= 0 or self.lane_width <= 0:
            raise InvalidConfig("frame_rate, road_length and lane_width must be positive")


def lane_markings(config: SynthConfig) -> tuple[tuple[float, ...], tuple[float, ...]]:
    k = config.lanes_per_carriageway
    w = config.lane_width
    upper = tuple(FIRST_MARKING_Y + i * w for i in range(k + 1))
    lower_start = upper[-1] + MEDIAN_GAP_M
    lower = tuple(lower_start + i * w for i in range(k + 1))
    return upper, lower


def generate_synthetic(config: SynthConfig, seed: int) -> Recording:
    """Generate a recording; deterministic for a given (config, seed) pair."""
    config.validate()
    rng = np.random.default_rng(seed)
    upper, lower = lane_markings(config)
    total_frames = int(round(config.duration_s * config.frame_rate))
    if total_frames < 1:
        raise InvalidConfig("duration shorter than one frame")
    fps = config.frame_rate

    tracks_meta: dict[int, TrackMeta] = {}
    col_frames: list[np.ndarray] = []
    col_ids: list[np.ndarray] = []
    col_bx: list[np.ndarray] = []
    col_by: list[np.ndarray] = []
    col_vx: list[np.ndarray] = []
    col_vy: list[np.ndarray] = []
    col_lane: list[np.ndarray] = []

    for vid in range(1, config.vehicle_count + 1):
        direction = (DrivingDirection.UPPER_CARRIAGEWAY
                     if rng.random() < 0.5 else DrivingDirection.LOWER_CARRIAGEWAY)
        sigma = direction_sign(direction)
        is_truck = rng.random() < config.truck_fraction
        if is_truck:
            length = quantize(rng.uniform(8.0, 12.0))
            lat_size = quantize(rng.uniform(2.3, 2.6))
        else:
            length = quantize(rng.uniform(3.8, 5.4))
            lat_size = quantize(rng.uniform(1.7, 2.1))
        speed = quantize(rng.uniform(config.speed_min, config.speed_max))
        entry_frame = int(rng.integers(1, total_frames + 1))
        marks = upper if direction == DrivingDirection.UPPER_CARRIAGEWAY else lower
        lane_index = int(rng.integers(1, config.lanes_per_carriageway + 1))

        if entry_frame == 1:
            x0 = rng.uniform(length / 2.0, config.road_length - length / 2.0)
        elif direction == DrivingDirection.LOWER_CARRIAGEWAY:
            x0 = length / 2.0
        else:
            x0 = config.road_length - length / 2.0

        # Lane-change plan; drawn for every vehicle to keep the stream stable.
        wants_change = rng.random() < config.lane_change_probability
        target_delta = 1 if rng.random() < 0.5 else -1
        change_start_u = rng.uniform(0.2, 0.6)

        if sigma > 0:
            headroom = config.road_length - length / 2.0 - x0
        else:
            headroom = x0 - length / 2.0
        exit_frame = entry_frame + int(math.floor(headroom / speed * fps))
        final_frame = min(total_frames, exit_frame)
        if final_frame < entry_frame:
            continue

        frames = np.arange(entry_frame, final_frame + 1, dtype=np.int64)
        t = (frames - entry_frame) / fps
        cx_plan = x0 + sigma * speed * t

        lane_mid = (marks[lane_index - 1] + marks[lane_index]) / 2.0
        cy_plan = np.full(len(frames), lane_mid)
        vy_plan = np.zeros(len(frames))
        target = lane_index + target_delta
        duration_frames = len(frames) / fps
        if (wants_change and 1 <= target <= config.lanes_per_carriageway
                and duration_frames > LANE_CHANGE_DURATION_S + 2.0):
            start_t = change_start_u * (duration_frames - LANE_CHANGE_DURATION_S - 1.0)
            target_mid = (marks[target - 1] + marks[target]) / 2.0
            dy = target_mid - lane_mid
            u = np.clip((t - start_t) / LANE_CHANGE_DURATION_S, 0.0, 1.0)
            cy_plan = lane_mid + dy * (1.0 - np.cos(np.pi * u)) / 2.0
            in_ramp = (u > 0.0) & (u < 1.0)
            vy_plan = np.where(
                in_ramp, dy * np.pi / (2.0 * LANE_CHANGE_DURATION_S) * np.sin(np.pi * u), 0.0)

        # Quantize the raw columns first; every derived value below uses the
        # quantized numbers so disk and memory agree exactly.
        bx = _quantize_array(cx_plan - length / 2.0)
        by = _quantize_array(cy_plan - lat_size / 2.0)
        vx = np.full(len(frames), quantize(sigma * speed))
        vy = _quantize_array(vy_plan)
        cy = by + lat_size / 2.0
        lane_ids = _lane_ids_from_y(cy, direction, upper, lower)

        tracks_meta[vid] = TrackMeta(
            vehicle_id=vid, recording_id=config.recording_id,
            initial_frame=int(frames[0]), final_frame=int(frames[-1]),
            width=length, height=lat_size, driving_direction=direction,
            vehicle_class=VehicleClass.TRUCK if is_truck else VehicleClass.CAR,
        )
        col_frames.append(frames)
        col_ids.append(np.full(len(frames), vid, dtype=np.int64))
        col_bx.append(bx)
        col_by.append(by)
        col_vx.append(vx)
        col_vy.append(vy)
        col_lane.append(lane_ids)

    if col_frames:
        frames_all = np.concatenate(col_frames)
        ids_all = np.concatenate(col_ids)
        bx_all = np.concatenate(col_bx)
        by_all = np.concatenate(col_by)
        vx_all = np.concatenate(col_vx)
        vy_all = np.concatenate(col_vy)
        lane_all = np.concatenate(col_lane)
    else:
        frames_all = ids_all = lane_all = np.zeros(0, dtype=np.int64)
        bx_all = by_all = vx_all = vy_all = np.zeros(0)

    length_by_vid = np.zeros(config.vehicle_count + 1)
    dir_by_vid = np.zeros(config.vehicle_count + 1, dtype=np.int64)
    for vid, tm in tracks_meta.items():
        length_by_vid[vid] = tm.width
        dir_by_vid[vid] = int(tm.driving_direction)
    cx_all = bx_all + length_by_vid[ids_all] / 2.0 if len(ids_all) else bx_all

    surrounding = assign_surrounding_ids(
        frames=frames_all, ids=ids_all, center_x=cx_all,
        half_length=length_by_vid[ids_all] / 2.0 if len(ids_all) else bx_all,
        lane_ids=lane_all, directions=dir_by_vid[ids_all] if len(ids_all) else ids_all,
    )

    meta = RecordingMeta(
        recording_id=config.recording_id,
        frame_rate=quantize(config.frame_rate),
        location_id=config.location_id,
        upper_lane_markings=tuple(quantize(v) for v in upper),
        lower_lane_markings=tuple(quantize(v) for v in lower),
        duration=quantize(total_frames / fps),
    )
    columns = {
        "frame": frames_all, "id": ids_all, "x": bx_all, "y": by_all,
        "xVelocity": vx_all, "yVelocity": vy_all, "laneId": lane_all,
        "surrounding": surrounding,
    }
    return build_recording(meta, tracks_meta, columns)


def _quantize_array(values: np.ndarray) -> np.ndarray:
    # np.round(x, 2) yields the correctly rounded double of k/100, which the
    # "%.2f" writer and the CSV loader reproduce bit-exactly.
    return np.round(np.asarray(values, dtype=np.float64), 2)


def _lane_ids_from_y(center_y: np.ndarray, direction: DrivingDirection,
                     upper: tuple[float, ...], lower: tuple[float, ...]) -> np.ndarray:
    marks = np.asarray(upper if direction == DrivingDirection.UPPER_CARRIAGEWAY else lower)
    k = np.clip(np.searchsorted(marks, center_y, side="right"), 1, len(marks) - 1)
    offset = 1 if direction == DrivingDirection.UPPER_CARRIAGEWAY else len(upper) + 1
    return (k + offset).astype(np.int64)


def assign_surrounding_ids(*, frames: np.ndarray, ids: np.ndarray,
                           center_x: np.ndarray, half_length: np.ndarray,
                           lane_ids: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Fill the eight neighbour slots for every state row.

    Slots follow the tracks-file column order. Only vehicles of the same
    carriageway interact; "left"/"right" are the driver's left and right,
    which depend on the travel direction.
    """
    n = len(frames)
    out = np.zeros((n, 8), dtype=np.int64)
    if n == 0:
        return out
    order = np.argsort(frames, kind="stable")
    sorted_frames = frames[order]
    starts = np.flatnonzero(np.r_[True, np.diff(sorted_frames) != 0])
    bounds = np.r_[starts, n]
    for b in range(len(starts)):
        rows = order[bounds[b]:bounds[b + 1]]
        for direction in (1, 2):
            sel = rows[directions[rows] == direction]
            if len(sel) < 2:
                continue
            sigma = 1.0 if direction == 2 else -1.0
            cx = center_x[sel]
            hl = half_length[sel]
            lane = lane_ids[sel]
            vids = ids[sel]
            dx = cx[None, :] - cx[:, None]          # dx[e, u] = x_u - x_e
            fwd = sigma * dx
            gap = np.abs(dx) - (hl[None, :] + hl[:, None])
            same = lane[None, :] == lane[:, None]
            np.fill_diagonal(same, False)
            # Driver's left is one lane toward the median: smaller lane id on
            # the lower carriageway, larger on the upper.
            left_delta = 1 if direction == 1 else -1
            left = lane[None, :] == (lane[:, None] + left_delta)
            right = lane[None, :] == (lane[:, None] - left_delta)
            ahead = fwd > 0
            behind = fwd < 0
            overlap = gap < 0

            slot_masks = (
                same & ahead,                       # preceding
                same & behind,                      # following
                left & ahead & ~overlap,            # left_preceding
                left & overlap,                     # left_alongside
                left & behind & ~overlap,           # left_following
                right & ahead & ~overlap,           # right_preceding
                right & overlap,                    # right_alongside
                right & behind & ~overlap,          # right_following
            )
            absdx = np.abs(dx)
            big = np.inf
            for slot, mask in enumerate(slot_masks):
                dist = np.where(mask, absdx, big)
                best = dist.min(axis=1)
                found = best < big
                if not found.any():
                    continue
                tie = dist == best[:, None]
                pick = np.where(tie, vids[None, :], np.iinfo(np.int64).max)
                chosen = pick.min(axis=1)
                out[sel[found], slot] = chosen[found]
    return out
