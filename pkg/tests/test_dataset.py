"""Loader, writer and synthetic-generator tests."""

import csv

import numpy as np
import pytest

import oracles
from scenesift import (
    DrivingDirection,
    SynthConfig,
    generate_synthetic,
    load_recording,
    write_recording,
)
from scenesift.dataset import REQUIRED_TRACK_COLUMNS, SLOTS, quantize
from scenesift.errors import InconsistentMeta, InvalidConfig, MalformedRow, MissingFile


def write_and_reload(recording, tmp_path):
    write_recording(recording, tmp_path)
    return load_recording(tmp_path, recording.meta.recording_id)


ARRAY_FIELDS = ("ids", "frames", "bbox_x", "bbox_y", "center_x", "center_y",
                "x_velocity", "y_velocity", "lane_ids", "surrounding")


class TestRoundTrip:
    def test_loaded_recording_identical(self, small_recording, tmp_path):
        loaded = write_and_reload(small_recording, tmp_path)
        assert loaded.meta == small_recording.meta
        assert dict(loaded.tracks_meta) == dict(small_recording.tracks_meta)
        for name in ARRAY_FIELDS:
            assert np.array_equal(getattr(loaded, name), getattr(small_recording, name)), name

    def test_same_seed_byte_identical(self, tmp_path):
        config = SynthConfig(vehicle_count=15, duration_s=20.0)
        write_recording(generate_synthetic(config, 5), tmp_path / "a")
        write_recording(generate_synthetic(config, 5), tmp_path / "b")
        for name in ("01_tracks.csv", "01_tracksMeta.csv", "01_recordingMeta.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_different_seed_differs(self, tmp_path):
        config = SynthConfig(vehicle_count=15, duration_s=20.0)
        write_recording(generate_synthetic(config, 5), tmp_path / "a")
        write_recording(generate_synthetic(config, 6), tmp_path / "b")
        assert (tmp_path / "a" / "01_tracks.csv").read_bytes() != \
            (tmp_path / "b" / "01_tracks.csv").read_bytes()


class TestLookup:
    def test_every_declared_state_resolves(self, small_recording):
        for vid, tm in small_recording.tracks_meta.items():
            for frame in range(tm.initial_frame, tm.final_frame + 1):
                state = small_recording.state(vid, frame)
                assert state.vehicle_id == vid and state.frame == frame

    def test_outside_range_returns_none(self, small_recording):
        vid = small_recording.vehicle_ids[0]
        tm = small_recording.tracks_meta[vid]
        assert small_recording.row_index(vid, tm.initial_frame - 1) is None
        assert small_recording.row_index(vid, tm.final_frame + 1) is None

    def test_centers_derived_from_bbox(self, small_recording):
        vid = small_recording.vehicle_ids[0]
        tm = small_recording.tracks_meta[vid]
        state = small_recording.state(vid, tm.initial_frame)
        assert state.center_x == state.bbox_x + tm.width / 2.0
        assert state.center_y == state.bbox_y + tm.height / 2.0

    def test_arrays_immutable(self, small_recording):
        with pytest.raises(ValueError):
            small_recording.center_x[0] = 1.0


class TestSurroundingConsistency:
    def test_neighbors_coexist(self, small_recording):
        rec = small_recording
        for row in range(rec.n_states):
            frame = int(rec.frames[row])
            for neighbor in rec.surrounding[row]:
                if neighbor > 0:
                    assert rec.has_state(int(neighbor), frame)

    def test_slots_match_bruteforce_recomputation(self):
        """Spec case: 2 lanes, 50 vehicles, 60 s, seed 42."""
        rec = generate_synthetic(SynthConfig(vehicle_count=50, duration_s=60.0), seed=42)
        n_upper = len(rec.meta.upper_lane_markings)
        by_frame: dict[int, list[dict]] = {}
        for vid in rec.vehicle_ids:
            tm = rec.tracks_meta[vid]
            rows = rec.track_rows(vid)
            direction = int(tm.driving_direction)
            for r in range(rows.start, rows.stop):
                lane_id = int(rec.lane_ids[r])
                lane_index = lane_id - 1 if direction == 1 else lane_id - n_upper - 1
                by_frame.setdefault(int(rec.frames[r]), []).append({
                    "vehicle_id": vid,
                    "center_x": float(rec.center_x[r]),
                    "half_length": tm.width / 2.0,
                    "lane_index": lane_index,
                    "direction": direction,
                    "row": r,
                })
        checked = 0
        for frame, states in by_frame.items():
            for ego in states:
                expected = oracles.surrounding_slots(ego, states)
                actual = rec.surrounding[ego["row"]]
                for i, slot in enumerate(SLOTS):
                    want = expected[slot] if expected[slot] is not None else 0
                    assert actual[i] == want, (frame, ego["vehicle_id"], slot)
                checked += 1
        assert checked > 1000

    def test_single_vehicle_never_has_neighbors(self):
        rec = generate_synthetic(SynthConfig(vehicle_count=1, duration_s=10.0), seed=7)
        assert len(rec.vehicle_ids) == 1
        assert (rec.surrounding == 0).all()


class TestLoaderErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_recording(tmp_path, 3)

    def test_zero_vehicle_recording_is_valid(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        (tmp_path / "01_tracks.csv").write_text(",".join(REQUIRED_TRACK_COLUMNS) + "\n")
        header = (tmp_path / "01_tracksMeta.csv").read_text().splitlines()[0]
        (tmp_path / "01_tracksMeta.csv").write_text(header + "\n")
        rec = load_recording(tmp_path, 1)
        assert rec.vehicle_ids == () and rec.n_states == 0

    def test_empty_tracks_with_declared_vehicles(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        (tmp_path / "01_tracks.csv").write_text(",".join(REQUIRED_TRACK_COLUMNS) + "\n")
        with pytest.raises(InconsistentMeta):
            load_recording(tmp_path, 1)

    def test_malformed_cell_reports_row_and_column(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracks.csv"
        lines = path.read_text().splitlines()
        cells = lines[3].split(",")
        cells[2] = "not-a-number"
        lines[3] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedRow) as err:
            load_recording(tmp_path, 1)
        assert err.value.row == 4
        assert err.value.column == "x"

    def test_missing_column_reported(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracks.csv"
        lines = path.read_text().splitlines()
        out = []
        for line in lines:
            out.append(",".join(line.split(",")[:-1]))
        path.write_text("\n".join(out) + "\n")
        with pytest.raises(MalformedRow) as err:
            load_recording(tmp_path, 1)
        assert err.value.column == REQUIRED_TRACK_COLUMNS[-1]

    def test_unknown_vehicle_in_tracks(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracksMeta.csv"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")   # drop the last vehicle
        with pytest.raises(InconsistentMeta):
            load_recording(tmp_path, 1)

    def test_frame_range_mismatch(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracksMeta.csv"
        lines = path.read_text().splitlines()
        cells = lines[1].split(",")
        cells[4] = str(int(cells[4]) + 5)   # finalFrame beyond actual rows
        lines[1] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(InconsistentMeta):
            load_recording(tmp_path, 1)

    def test_nonmonotone_markings(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_recordingMeta.csv"
        lines = path.read_text().splitlines()
        cells = list(csv.reader([lines[1]]))[0]
        cells[3] = "12.00;8.00;16.00"
        path.write_text(lines[0] + "\n" + ",".join(f'"{c}"' if ";" in c else c for c in cells) + "\n")
        with pytest.raises(InconsistentMeta):
            load_recording(tmp_path, 1)

    def test_dangling_surrounding_id(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracks.csv"
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        cells = lines[1].split(",")
        cells[header.index("precedingId")] = "9999"
        lines[1] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(InconsistentMeta):
            load_recording(tmp_path, 1)

    def test_extra_columns_tolerated(self, small_recording, tmp_path):
        write_recording(small_recording, tmp_path)
        path = tmp_path / "01_tracks.csv"
        lines = path.read_text().splitlines()
        lines[0] += ",ttc"
        for i in range(1, len(lines)):
            lines[i] += ",-1.00"
        path.write_text("\n".join(lines) + "\n")
        rec = load_recording(tmp_path, 1)
        assert np.array_equal(rec.ids, small_recording.ids)


class TestSynthConfig:
    @pytest.mark.parametrize("kwargs", [
        {"lanes_per_carriageway": 1},
        {"lanes_per_carriageway": 5},
        {"vehicle_count": 0},
        {"duration_s": -1.0},
        {"speed_min": 30.0, "speed_max": 20.0},
        {"speed_min": -5.0},
        {"lane_change_probability": 1.5},
    ])
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(InvalidConfig):
            generate_synthetic(SynthConfig(**kwargs), seed=1)

    def test_quantize_roundtrips_through_format(self):
        rng = np.random.default_rng(0)
        for value in rng.uniform(-500, 500, size=2000):
            q = quantize(value)
            assert float(f"{q:.2f}") == q

    def test_both_carriageways_populated(self, small_recording):
        directions = {tm.driving_direction for tm in small_recording.tracks_meta.values()}
        assert directions == {DrivingDirection.UPPER_CARRIAGEWAY,
                              DrivingDirection.LOWER_CARRIAGEWAY}
