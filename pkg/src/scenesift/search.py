"""Scan a dataset for the scenes whose context is nearest a chosen example.

The scan enumerates every (vehicle, frame) combination in the query's
relative lane, scores each candidate context set against the example with
the Hausdorff distance, keeps the single best frame per vehicle (consecutive
frames are near-duplicates), and returns the top N vehicles by distance.

Candidates are sharded by vehicle and scored with a vectorised kernel. A
shared top table provides a shrinking cutoff: any candidate that provably
exceeds the current worst retained distance can be discarded early. Because
a stale (too large) cutoff only makes pruning less aggressive, the final
entry list is identical for any worker count and for the exhaustive
reference scan.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional

import numpy as np

LOG = logging.getLogger(__name__)

from .context import (
    DEFAULT_LAMBDA,
    ContextSet,
    LANE_CODES,
    LaneOverrides,
    RelativeLane,
    SceneKey,
    extract_context_set,
    lane_code_table,
    unscaled_point,
)
from .dataset import Recording, direction_sign
from .errors import NoCandidates, UnknownScene
from .metric import hausdorff_many

RESULT_SCHEMA = "scenesift.search-result/v1"


@dataclass(frozen=True)
class SearchQuery:
    """Parameters of one scene-similarity search."""

    example: SceneKey
    lam: float = DEFAULT_LAMBDA
    top_n: int = 250
    frame_stride: int = 1
    include_ego: bool = False
    exclude_query_vehicle: bool = False

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {self.top_n}")
        if self.frame_stride < 1:
            raise ValueError(f"frame_stride must be >= 1, got {self.frame_stride}")
        if self.lam <= 0:
            raise ValueError(f"lateral scaling must be positive, got {self.lam}")


@dataclass
class SearchStats:
    candidates_enumerated: int = 0
    candidates_after_lane_filter: int = 0
    empty_contexts_skipped: int = 0
    distances_computed: int = 0
    full_evaluations: int = 0   # timing dependent under pruning; manifest only
    wall_time: float = 0.0

    def deterministic_dict(self) -> dict:
        return {
            "candidates_enumerated": self.candidates_enumerated,
            "candidates_after_lane_filter": self.candidates_after_lane_filter,
            "empty_contexts_skipped": self.empty_contexts_skipped,
            "distances_computed": self.distances_computed,
        }


@dataclass(frozen=True)
class SearchEntry:
    key: SceneKey
    distance: float
    context: ContextSet


@dataclass
class SearchResult:
    query: SearchQuery
    lane: RelativeLane
    entries: list[SearchEntry]
    stats: SearchStats


# ---------------------------------------------------------------------------
# Candidate enumeration
# ---------------------------------------------------------------------------

@dataclass
class _VehiclePlan:
    recording: Recording
    lane_table: np.ndarray
    vehicle_id: int
    candidate_count: int


def _candidate_mask(recording: Recording, lane_table: np.ndarray, vehicle_id: int,
                    lane_code: int, stride: int, skip_empty: bool):
    """Boolean mask over a vehicle's rows plus the per-stage counts."""
    rows = recording.track_rows(vehicle_id)
    frames = recording.frames[rows]
    initial = recording.tracks_meta[vehicle_id].initial_frame
    stride_mask = (frames - initial) % stride == 0
    lane_ids = recording.lane_ids[rows]
    in_range = (lane_ids >= 0) & (lane_ids < len(lane_table))
    codes = np.where(in_range, lane_table[np.clip(lane_ids, 0, len(lane_table) - 1)], -1)
    lane_mask = stride_mask & (codes == lane_code)
    if skip_empty:
        nonempty = (recording.surrounding[rows] > 0).any(axis=1)
        final_mask = lane_mask & nonempty
    else:
        final_mask = lane_mask
    return rows, final_mask, int(stride_mask.sum()), int(lane_mask.sum())


def enumerate_candidates(dataset: Mapping[int, Recording], lane: RelativeLane,
                         stride: int = 1, skip_empty: bool = True,
                         overrides: Optional[LaneOverrides] = None,
                         stats: Optional[SearchStats] = None) -> Iterator[SceneKey]:
    """Yield every candidate scene in the given relative lane.

    Candidates are frames congruent to the vehicle's initial frame modulo
    ``stride``. When ``skip_empty`` is set, scenes without any surrounding
    vehicle are dropped (and counted in ``stats``); the lane-filter count in
    ``stats`` still includes them.
    """
    if stats is None:
        stats = SearchStats()
    code = LANE_CODES.index(lane)
    for rid in sorted(dataset):
        recording = dataset[rid]
        table = lane_code_table(recording, overrides)
        for vid in recording.vehicle_ids:
            rows, mask, n_stride, n_lane = _candidate_mask(
                recording, table, vid, code, stride, skip_empty)
            stats.candidates_enumerated += n_stride
            stats.candidates_after_lane_filter += n_lane
            stats.empty_contexts_skipped += n_lane - int(mask.sum())
            if not mask.any():
                continue
            frames = recording.frames[rows][mask]
            for f in frames:
                yield SceneKey(rid, vid, int(f))


# ---------------------------------------------------------------------------
# Vectorised candidate scoring
# ---------------------------------------------------------------------------

def _context_stacks(recording: Recording, vehicle_id: int, mask: np.ndarray,
                    lam: float, include_ego: bool):
    """Candidate context sets of one vehicle, grouped by cardinality.

    Yields (frames, values) pairs where values is (B, n, 4) in the scaled
    canonical frame, frames ascending within each group. The arithmetic per
    point matches :func:`scenesift.context.extract_context_set` operation
    for operation, so distances computed from these stacks are bit-identical
    to the scalar extraction path.
    """
    rows_slice = recording.track_rows(vehicle_id)
    idx = np.flatnonzero(mask) + rows_slice.start
    if len(idx) == 0:
        return
    tm = recording.tracks_meta[vehicle_id]
    sigma = direction_sign(tm.driving_direction)
    frames = recording.frames[idx]
    sur = recording.surrounding[idx]                      # (F, 8)
    present = sur > 0
    nrows = recording.start_by_vid[sur] + (frames[:, None] - recording.init_by_vid[sur])
    nrows = np.where(present, nrows, 0)                   # absent slots never read

    ego_cx = recording.center_x[idx][:, None]
    ego_cy = recording.center_y[idx][:, None]
    ncx = recording.center_x[nrows]
    ncy = recording.center_y[nrows]
    nvx = recording.x_velocity[nrows]
    nvy = recording.y_velocity[nrows]

    x = sigma * (ncx - ego_cx)
    y = -sigma * (ncy - ego_cy)
    vx = sigma * nvx
    vy = -sigma * nvy
    vals = np.stack([x, lam * y, vx, lam * vy], axis=2)   # (F, 8, 4)

    if include_ego:
        ego_vx = sigma * recording.x_velocity[idx]
        ego_vy = lam * (-sigma * recording.y_velocity[idx])
        ego_col = np.stack([np.zeros(len(idx)), np.zeros(len(idx)), ego_vx, ego_vy], axis=1)
        vals = np.concatenate([vals, ego_col[:, None, :]], axis=1)
        present = np.concatenate([present, np.ones((len(idx), 1), dtype=bool)], axis=1)

    counts = present.sum(axis=1)
    for n in np.unique(counts):
        if n == 0:
            continue
        sel = counts == n
        group_vals = vals[sel][present[sel]].reshape(-1, int(n), 4)
        yield frames[sel], group_vals


def _best_frame_for_vehicle(query_values: np.ndarray, recording: Recording,
                            vehicle_id: int, mask: np.ndarray, lam: float,
                            include_ego: bool, cutoff: float):
    """(distance, frame, n_full_evaluations) of the vehicle's nearest scene.

    Returns None when every candidate frame provably exceeds the cutoff.
    Ties in distance resolve to the lowest frame.
    """
    best_d = math.inf
    best_frame = None
    n_kept = 0
    for frames, stack in _context_stacks(recording, vehicle_id, mask, lam, include_ego):
        d = hausdorff_many(query_values, stack, cutoff)
        n_kept += int(np.isfinite(d).sum())
        i = int(np.argmin(d))
        di = float(d[i])
        if not math.isfinite(di):
            continue
        fi = int(frames[i])
        if di < best_d or (di == best_d and fi < best_frame):
            best_d, best_frame = di, fi
    if best_frame is None:
        return None
    return best_d, best_frame, n_kept


# ---------------------------------------------------------------------------
# Top table
# ---------------------------------------------------------------------------

class _TopTable:
    """Bounded table of the N best (distance, recording, ego, frame) entries.

    Keeps the N smallest in the tie-broken total order; the retained set is
    a pure function of the inserted multiset, which is what makes parallel
    merges deterministic.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._heap: list[tuple] = []   # negated entries; root = worst retained

    def offer(self, entry: tuple) -> None:
        neg = tuple(-v for v in entry)
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, neg)
        elif neg > self._heap[0]:
            heapq.heapreplace(self._heap, neg)

    def cutoff(self) -> float:
        if len(self._heap) < self.capacity:
            return math.inf
        return -self._heap[0][0]

    def sorted_entries(self) -> list[tuple]:
        return sorted(tuple(-v for v in neg) for neg in self._heap)


# ---------------------------------------------------------------------------
# Search driver
# ---------------------------------------------------------------------------

_SHARD_FRAME_BUDGET = 20000


def search(dataset: Mapping[int, Recording], query: SearchQuery, *,
           workers: int = 1, prune: bool = True,
           overrides: Optional[LaneOverrides] = None) -> SearchResult:
    """Run the full scan and return the deduplicated top-N scenes.

    ``workers`` sets the number of scan threads; ``prune=False`` forces the
    exhaustive reference scan that computes every distance in full. Entries
    are identical either way.
    """
    t0 = time.perf_counter()
    example_rec = dataset.get(query.example.recording_id)
    if example_rec is None:
        raise UnknownScene(f"recording {query.example.recording_id} not in dataset")
    query_ctx = extract_context_set(example_rec, query.example, query.lam,
                                    query.include_ego, overrides)
    lane = query_ctx.relative_lane
    lane_code = LANE_CODES.index(lane)
    query_values = query_ctx.values
    skip_empty = not query.include_ego

    stats = SearchStats()
    plans: list[_VehiclePlan] = []
    for rid in sorted(dataset):
        recording = dataset[rid]
        table = lane_code_table(recording, overrides)
        for vid in recording.vehicle_ids:
            if query.exclude_query_vehicle and (rid, vid) == (
                    query.example.recording_id, query.example.ego_id):
                continue
            _, mask, n_stride, n_lane = _candidate_mask(
                recording, table, vid, lane_code, query.frame_stride, skip_empty)
            stats.candidates_enumerated += n_stride
            stats.candidates_after_lane_filter += n_lane
            n_scored = int(mask.sum())
            stats.empty_contexts_skipped += n_lane - n_scored
            stats.distances_computed += n_scored
            if n_scored:
                plans.append(_VehiclePlan(recording, table, vid, n_scored))

    if stats.distances_computed == 0:
        raise NoCandidates(f"no scene in relative lane {lane.value} matches the query filters")

    shards: list[list[_VehiclePlan]] = []
    current: list[_VehiclePlan] = []
    load = 0
    for plan in plans:
        current.append(plan)
        load += plan.candidate_count
        if load >= _SHARD_FRAME_BUDGET:
            shards.append(current)
            current, load = [], 0
    if current:
        shards.append(current)

    table_lock = threading.Lock()
    top = _TopTable(query.top_n)
    shard_iter = iter(range(len(shards)))
    full_evaluations = [0]
    progress = {"done": 0, "last_log": time.perf_counter()}
    failures: list[BaseException] = []

    def run_worker():
        try:
            while True:
                with table_lock:
                    shard_index = next(shard_iter, None)
                    cutoff = top.cutoff() if prune else math.inf
                if shard_index is None:
                    return
                local: list[tuple] = []
                n_kept = 0
                for plan in shards[shard_index]:
                    _, mask, _, _ = _candidate_mask(
                        plan.recording, plan.lane_table, plan.vehicle_id,
                        lane_code, query.frame_stride, skip_empty)
                    found = _best_frame_for_vehicle(
                        query_values, plan.recording, plan.vehicle_id, mask,
                        query.lam, query.include_ego, cutoff)
                    if found is not None:
                        d, frame, evals = found
                        n_kept += evals
                        local.append((d, plan.recording.meta.recording_id,
                                      plan.vehicle_id, frame))
                with table_lock:
                    for entry in local:
                        top.offer(entry)
                    full_evaluations[0] += n_kept
                    progress["done"] += 1
                    now = time.perf_counter()
                    if now - progress["last_log"] > 5.0:
                        progress["last_log"] = now
                        LOG.info("scanned %d/%d shards, current cutoff %.3f",
                                 progress["done"], len(shards), top.cutoff())
        except BaseException as exc:  # re-raised on the caller's thread
            failures.append(exc)

    if workers <= 1:
        run_worker()
    else:
        threads = [threading.Thread(target=run_worker) for _ in range(workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if failures:
        raise failures[0]

    entries = []
    for d, rid, vid, frame in top.sorted_entries():
        key = SceneKey(rid, vid, frame)
        ctx = extract_context_set(dataset[rid], key, query.lam, query.include_ego, overrides)
        entries.append(SearchEntry(key=key, distance=d, context=ctx))

    stats.full_evaluations = full_evaluations[0]
    stats.wall_time = time.perf_counter() - t0
    return SearchResult(query=query, lane=lane, entries=entries, stats=stats)


# ---------------------------------------------------------------------------
# Spread report
# ---------------------------------------------------------------------------

@dataclass
class PointSpread:
    """Per-example-point statistics of the retrieved sets, unscaled units.

    Deltas are (retrieved point - example point) for the retrieved points
    assigned to this example point by nearest-neighbour matching in the
    scaled 4-D space.
    """

    example: tuple[float, float, float, float]
    count: int = 0
    delta_min: np.ndarray = field(default_factory=lambda: np.full(4, np.inf))
    delta_max: np.ndarray = field(default_factory=lambda: np.full(4, -np.inf))
    delta_sum: np.ndarray = field(default_factory=lambda: np.zeros(4))

    @property
    def delta_mean(self) -> np.ndarray:
        return self.delta_sum / self.count if self.count else np.zeros(4)


@dataclass
class ContextSpread:
    per_point: list[PointSpread]
    cardinality_hist: dict[int, int]
    max_abs_dx: float
    max_abs_dy: float
    max_abs_dvx: float
    max_abs_dvy: float


def spread_report(result: SearchResult, dataset: Mapping[int, Recording],
                  query: SearchQuery,
                  overrides: Optional[LaneOverrides] = None) -> ContextSpread:
    """Summarise how far the retrieved context points spread around the example."""
    if not result.entries:
        raise NoCandidates("spread report needs a non-empty result")
    example_rec = dataset[query.example.recording_id]
    example_ctx = extract_context_set(example_rec, query.example, query.lam,
                                      query.include_ego, overrides)
    scaled = example_ctx.values
    spreads = [PointSpread(example=unscaled_point(p, query.lam))
               for p in example_ctx.points]
    hist: dict[int, int] = {}
    unscale = np.array([1.0, 1.0 / query.lam, 1.0, 1.0 / query.lam])

    for entry in result.entries:
        hist[len(entry.context)] = hist.get(len(entry.context), 0) + 1
        for point, row in zip(entry.context.points, entry.context.values):
            diff = scaled - row
            nearest = int(np.argmin((diff * diff).sum(axis=1)))
            delta = (row - scaled[nearest]) * unscale
            s = spreads[nearest]
            s.count += 1
            s.delta_min = np.minimum(s.delta_min, delta)
            s.delta_max = np.maximum(s.delta_max, delta)
            s.delta_sum = s.delta_sum + delta

    def axis_max(i: int) -> float:
        values = [max(abs(s.delta_min[i]), abs(s.delta_max[i]))
                  for s in spreads if s.count]
        return max(values) if values else 0.0

    return ContextSpread(
        per_point=spreads,
        cardinality_hist=dict(sorted(hist.items())),
        max_abs_dx=axis_max(0), max_abs_dy=axis_max(1),
        max_abs_dvx=axis_max(2), max_abs_dvy=axis_max(3),
    )


# ---------------------------------------------------------------------------
# Result file round trip
# ---------------------------------------------------------------------------

def result_to_dict(result: SearchResult) -> dict:
    q = result.query
    return {
        "schema": RESULT_SCHEMA,
        "query": {
            "recording": q.example.recording_id,
            "ego": q.example.ego_id,
            "frame": q.example.frame,
            "lambda": q.lam,
            "top_n": q.top_n,
            "frame_stride": q.frame_stride,
            "include_ego": q.include_ego,
            "exclude_query_vehicle": q.exclude_query_vehicle,
            "relative_lane": result.lane.value,
        },
        "stats": result.stats.deterministic_dict(),
        "entries": [
            {
                "recording": e.key.recording_id,
                "ego": e.key.ego_id,
                "frame": e.key.frame,
                "distance": e.distance,
                "context_points": [
                    {"x": p.x, "y_scaled": p.y_scaled, "vx": p.vx,
                     "vy_scaled": p.vy_scaled, "source_vehicle_id": p.source_vehicle_id}
                    for p in e.context.points
                ],
            }
            for e in result.entries
        ],
    }


def write_result_json(result: SearchResult, path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result), indent=2) + "\n")


def read_result_json(path) -> dict:
    """Load and schema-check a result file; raises SchemaMismatch on problems."""
    from .errors import SchemaMismatch

    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"cannot read result file {path}: {exc}")
    if not isinstance(doc, dict) or doc.get("schema") != RESULT_SCHEMA:
        raise SchemaMismatch(
            f"expected schema {RESULT_SCHEMA!r}, found {doc.get('schema') if isinstance(doc, dict) else type(doc)}")
    for section in ("query", "stats", "entries"):
        if section not in doc:
            raise SchemaMismatch(f"result file lacks section {section!r}")
    if not isinstance(doc["entries"], list):
        raise SchemaMismatch("entries must be a list")
    for i, entry in enumerate(doc["entries"]):
        for key in ("recording", "ego", "frame", "distance"):
            if key not in entry:
                raise SchemaMismatch(f"entry {i} lacks field {key!r}")
    return doc
