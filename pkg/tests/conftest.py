"""Shared fixtures: synthetic datasets, scripted recordings, highD gating."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from scenesift import (
    DrivingDirection,
    RecordingMeta,
    SceneKey,
    SynthConfig,
    TrackMeta,
    VehicleClass,
    build_recording,
    generate_synthetic,
)
from scenesift.synth import assign_surrounding_ids, lane_markings

HIGHD_ENV = "HIGHD_DATA_DIR"


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criteria report lines after the test run."""
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)


def highd_dir():
    value = os.environ.get(HIGHD_ENV)
    if not value or not Path(value).is_dir():
        return None
    return Path(value)


requires_highd = pytest.mark.skipif(
    highd_dir() is None,
    reason=f"set ${HIGHD_ENV} to a directory with the 60 highD recordings")


@pytest.fixture(scope="session")
def small_recording():
    return generate_synthetic(SynthConfig(vehicle_count=50, duration_s=60.0), seed=42)


@pytest.fixture(scope="session")
def small_dataset(small_recording):
    return {1: small_recording}


@pytest.fixture(scope="session")
def medium_dataset():
    """A few thousand candidates per lane; quick enough for repeated searches."""
    rec = generate_synthetic(
        SynthConfig(vehicle_count=120, duration_s=90.0, lane_change_probability=0.25),
        seed=1234)
    return {1: rec}


def pick_query_scene(recording, min_neighbors=2, lane=None):
    """First scene (mid-life frame) with enough neighbours, optionally in a lane."""
    from scenesift import relative_lane

    for vid in recording.vehicle_ids:
        tm = recording.tracks_meta[vid]
        frame = (tm.initial_frame + tm.final_frame) // 2
        state = recording.state(vid, frame)
        if sum(1 for _ in state.surrounding.present()) < min_neighbors:
            continue
        if lane is not None and relative_lane(recording, vid, frame) != lane:
            continue
        return SceneKey(recording.meta.recording_id, vid, frame)
    raise AssertionError("no suitable query scene in fixture recording")


# ---------------------------------------------------------------------------
# Scripted recordings
# ---------------------------------------------------------------------------

def scripted_recording(tracks, *, lanes_per_carriageway=2, lane_width=4.0,
                       frame_rate=25.0, recording_id=1, location_id=1,
                       auto_surround=True):
    """Build a recording from explicit per-vehicle trajectories.

    ``tracks`` is a list of dicts with vehicle_id, direction, frames (array),
    center_x, center_y (arrays), x_velocity, y_velocity (arrays or scalars),
    and optional length/lat_size. Lane ids derive from center_y; surrounding
    slots are computed from the geometry unless auto_surround is False.
    """
    config = SynthConfig(lanes_per_carriageway=lanes_per_carriageway,
                         lane_width=lane_width, frame_rate=frame_rate,
                         recording_id=recording_id, location_id=location_id)
    upper, lower = lane_markings(config)
    marks = {DrivingDirection.UPPER_CARRIAGEWAY: np.asarray(upper),
             DrivingDirection.LOWER_CARRIAGEWAY: np.asarray(lower)}

    tracks_meta = {}
    frames_l, ids_l, bx_l, by_l, vx_l, vy_l, lane_l = [], [], [], [], [], [], []
    for t in tracks:
        vid = t["vehicle_id"]
        direction = DrivingDirection(t["direction"])
        length = t.get("length", 4.0)
        lat_size = t.get("lat_size", 2.0)
        frames = np.asarray(t["frames"], dtype=np.int64)
        cx = np.broadcast_to(np.asarray(t["center_x"], dtype=np.float64), frames.shape).copy()
        cy = np.broadcast_to(np.asarray(t["center_y"], dtype=np.float64), frames.shape).copy()
        vx = np.broadcast_to(np.asarray(t["x_velocity"], dtype=np.float64), frames.shape).copy()
        vy = np.broadcast_to(np.asarray(t.get("y_velocity", 0.0), dtype=np.float64), frames.shape).copy()

        m = marks[direction]
        k = np.clip(np.searchsorted(m, cy, side="right"), 1, len(m) - 1)
        offset = 1 if direction == DrivingDirection.UPPER_CARRIAGEWAY else len(upper) + 1
        lane_ids = (k + offset).astype(np.int64)

        tracks_meta[vid] = TrackMeta(
            vehicle_id=vid, recording_id=recording_id,
            initial_frame=int(frames[0]), final_frame=int(frames[-1]),
            width=length, height=lat_size, driving_direction=direction,
            vehicle_class=VehicleClass.CAR)
        frames_l.append(frames)
        ids_l.append(np.full(len(frames), vid, dtype=np.int64))
        bx_l.append(cx - length / 2.0)
        by_l.append(cy - lat_size / 2.0)
        vx_l.append(vx)
        vy_l.append(vy)
        lane_l.append(lane_ids)

    frames_all = np.concatenate(frames_l)
    ids_all = np.concatenate(ids_l)
    bx_all = np.concatenate(bx_l)
    by_all = np.concatenate(by_l)
    lane_all = np.concatenate(lane_l)

    max_vid = max(tracks_meta)
    half = np.zeros(max_vid + 1)
    dirs = np.zeros(max_vid + 1, dtype=np.int64)
    for vid, tm in tracks_meta.items():
        half[vid] = tm.width / 2.0
        dirs[vid] = int(tm.driving_direction)

    if auto_surround:
        surrounding = assign_surrounding_ids(
            frames=frames_all, ids=ids_all,
            center_x=bx_all + np.array([tracks_meta[v].width for v in ids_all]) / 2.0,
            half_length=half[ids_all], lane_ids=lane_all, directions=dirs[ids_all])
    else:
        surrounding = np.zeros((len(frames_all), 8), dtype=np.int64)
        for t in tracks:
            if "surrounding" not in t:
                continue
            vid = t["vehicle_id"]
            rows = np.flatnonzero(ids_all == vid)
            surrounding[rows] = np.asarray(t["surrounding"], dtype=np.int64)

    meta = RecordingMeta(
        recording_id=recording_id, frame_rate=frame_rate, location_id=location_id,
        upper_lane_markings=tuple(upper), lower_lane_markings=tuple(lower),
        duration=float(frames_all.max()) / frame_rate)
    columns = {"frame": frames_all, "id": ids_all, "x": bx_all, "y": by_all,
               "xVelocity": np.concatenate(vx_l), "yVelocity": np.concatenate(vy_l),
               "laneId": lane_all, "surrounding": surrounding}
    return build_recording(meta, tracks_meta, columns)


# ---------------------------------------------------------------------------
# Planted-copy recordings
# ---------------------------------------------------------------------------

PLANT_BASE_POINTS = (
    # canonical (x, y, vx, vy), unscaled: preceding, following, left-following
    (30.0, 0.0, 50.0, 0.0),
    (-85.0, 0.2, 49.5, 0.1),
    (-120.0, 3.9, 51.0, -0.2),
)


def planted_recording(perturbations, *, base_points=PLANT_BASE_POINTS,
                      recording_id=2, window=40, frame_rate=25.0, ego_speed=50.0):
    """One isolated ego-plus-neighbours group per perturbation row.

    Groups live in disjoint frame windows so they never interact. Group g's
    neighbour offsets equal ``base_points + perturbations[g]`` exactly at the
    window's middle frame (the returned scene key); the ego sits in the right
    lane of the lower carriageway. Velocities around 50 m/s keep these scenes
    far from anything the random generator produces.
    """
    tracks = []
    keys = []
    vid = 1
    ego_cy = 24.0       # right lane of the default two-lane lower carriageway
    for g, pert in enumerate(perturbations):
        w0 = 1 + g * (window + 10)
        frames = np.arange(w0, w0 + window, dtype=np.int64)
        mid = w0 + window // 2
        t_off = (frames - mid) / frame_rate
        tracks.append({"vehicle_id": vid, "direction": 2, "frames": frames,
                       "center_x": 160.0 + ego_speed * t_off, "center_y": ego_cy,
                       "x_velocity": ego_speed, "y_velocity": 0.0})
        keys.append(SceneKey(recording_id, vid, int(mid)))
        vid += 1
        points = np.asarray(base_points, dtype=np.float64) + np.asarray(pert, dtype=np.float64)
        for dx, dy, pvx, pvy in points:
            tracks.append({"vehicle_id": vid, "direction": 2, "frames": frames,
                           "center_x": (160.0 + dx) + pvx * t_off,
                           "center_y": ego_cy - dy,
                           "x_velocity": pvx, "y_velocity": -pvy})
            vid += 1
    recording = scripted_recording(tracks, recording_id=recording_id,
                                   frame_rate=frame_rate)
    return recording, keys
