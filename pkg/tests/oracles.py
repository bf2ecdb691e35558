"""Independent reference implementations used to check the package.

Everything here is deliberately written as plain loops over plain Python
numbers, separate from the package's kernels, so agreement between the two
is meaningful.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path


def pair_distance(p, q) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dvx = p[2] - q[2]
    dvy = p[3] - q[3]
    acc = dx * dx
    acc += dy * dy
    acc += dvx * dvx
    acc += dvy * dvy
    return math.sqrt(acc)


def directed_hausdorff(a, b) -> float:
    worst = 0.0
    for p in a:
        best = math.inf
        for q in b:
            d = pair_distance(p, q)
            if d < best:
                best = d
        if best > worst:
            worst = best
    return worst


def hausdorff(a, b) -> float:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def as_tuples(values):
    return [tuple(float(v) for v in row) for row in values]


# ---------------------------------------------------------------------------
# Neighbour-slot recomputation from raw positions
# ---------------------------------------------------------------------------

SLOT_NAMES = ("preceding", "following", "left_preceding", "left_alongside",
              "left_following", "right_preceding", "right_alongside",
              "right_following")


def surrounding_slots(ego, others):
    """Recompute the eight neighbour slots of one vehicle state.

    ``ego`` and every entry of ``others`` are dicts with vehicle_id, center_x,
    half_length, lane_index (1 = top of carriageway), direction (1 upper /
    2 lower). Mirrors the generator's stated rules: nearest in lane ahead and
    behind, adjacent lanes split into alongside (longitudinal bounding-box
    overlap) and preceding/following, nearest per slot, ties to the lower id.
    """
    sigma = 1.0 if ego["direction"] == 2 else -1.0
    left_delta = 1 if ego["direction"] == 1 else -1
    candidates = {name: [] for name in SLOT_NAMES}
    for other in others:
        if other["direction"] != ego["direction"] or other["vehicle_id"] == ego["vehicle_id"]:
            continue
        dx = other["center_x"] - ego["center_x"]
        fwd = sigma * dx
        overlap = abs(dx) < other["half_length"] + ego["half_length"]
        if other["lane_index"] == ego["lane_index"]:
            if fwd > 0:
                candidates["preceding"].append((abs(dx), other["vehicle_id"]))
            elif fwd < 0:
                candidates["following"].append((abs(dx), other["vehicle_id"]))
        elif other["lane_index"] == ego["lane_index"] + left_delta:
            side = "left"
            _file_adjacent(candidates, side, fwd, overlap, abs(dx), other["vehicle_id"])
        elif other["lane_index"] == ego["lane_index"] - left_delta:
            side = "right"
            _file_adjacent(candidates, side, fwd, overlap, abs(dx), other["vehicle_id"])
    result = {}
    for name in SLOT_NAMES:
        result[name] = min(candidates[name])[1] if candidates[name] else None
    return result


def _file_adjacent(candidates, side, fwd, overlap, dist, vid):
    if overlap:
        candidates[f"{side}_alongside"].append((dist, vid))
    elif fwd > 0:
        candidates[f"{side}_preceding"].append((dist, vid))
    elif fwd < 0:
        candidates[f"{side}_following"].append((dist, vid))


# ---------------------------------------------------------------------------
# Raw-CSV scene recount for enumeration checks
# ---------------------------------------------------------------------------

def classify_lane_from_csv(lane_id, direction, n_upper_marks, n_lower_marks):
    """Left/Center/Right classification straight from the file columns."""
    if direction == 1:
        k = lane_id - 1
        count = n_upper_marks - 1
        rank = count - k
    else:
        k = lane_id - n_upper_marks - 1
        count = n_lower_marks - 1
        rank = k - 1
    if not (1 <= k <= count):
        return None
    if rank == count - 1:
        return "Right"
    if rank == 0:
        return "Left"
    return "Center"


def recount_candidates(data_dir, recording_id, lane_name, stride=1):
    """Count (vehicle, frame) rows in a relative lane by scanning the CSVs."""
    base = Path(data_dir)
    with open(base / f"{recording_id:02d}_recordingMeta.csv", newline="") as fh:
        meta = next(csv.DictReader(fh))
    n_upper = len(meta["upperLaneMarkings"].split(";"))
    n_lower = len(meta["lowerLaneMarkings"].split(";"))
    directions = {}
    initial = {}
    with open(base / f"{recording_id:02d}_tracksMeta.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            directions[int(row["id"])] = int(row["drivingDirection"])
            initial[int(row["id"])] = int(row["initialFrame"])
    count = 0
    with open(base / f"{recording_id:02d}_tracks.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            vid = int(row["id"])
            frame = int(row["frame"])
            if (frame - initial[vid]) % stride != 0:
                continue
            lane = classify_lane_from_csv(int(row["laneId"]), directions[vid],
                                          n_upper, n_lower)
            if lane == lane_name:
                count += 1
    return count
