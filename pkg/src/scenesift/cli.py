"""Command-line interface.

Subcommands wire the pipeline end to end: ``validate`` checks a data
directory, ``context`` prints one scene's context set, ``search`` runs the
similarity scan and writes a result file plus a run manifest, ``responses``
turns a result file into response trajectories and density estimates, and
``synth`` generates a synthetic dataset.

Machine-readable output goes to files or stdout; log lines go to stderr.
Exit codes: 0 success, 2 malformed data or invalid configuration, 3 the
query scene has no context, 4 no candidate scenes, 5 results-file schema
mismatch.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .context import SceneKey, extract_context_set, load_lane_overrides
from .dataset import list_recording_ids, load_dataset, load_recording, recording_paths, write_recording
from .errors import (
    EmptyContext,
    InvalidConfig,
    NoCandidates,
    SceneSiftError,
    SchemaMismatch,
)
from .response import (
    Axis,
    estimate_density,
    extract_responses,
    label_counts,
    silverman_bandwidth,
)
from .search import SearchQuery, read_result_json, search, write_result_json
from .synth import SynthConfig, generate_synthetic

LOG = logging.getLogger("scenesift")

MANIFEST_SCHEMA = "scenesift.run-manifest/v1"
DATA_DIR_ENV = "SCENESIFT_DATA_DIR"

EXIT_OK = 0
EXIT_DATA_ERROR = 2
EXIT_EMPTY_CONTEXT = 3
EXIT_NO_CANDIDATES = 4
EXIT_SCHEMA_MISMATCH = 5


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyContext as exc:
        LOG.error("empty context: %s", exc)
        return EXIT_EMPTY_CONTEXT
    except NoCandidates as exc:
        LOG.error("no candidates: %s", exc)
        return EXIT_NO_CANDIDATES
    except SchemaMismatch as exc:
        LOG.error("schema mismatch: %s", exc)
        return EXIT_SCHEMA_MISMATCH
    except SceneSiftError as exc:
        LOG.error("%s", exc)
        return EXIT_DATA_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenesift",
        description="Find traffic scenes with similar surrounding-vehicle context "
                    "and characterize the driver responses that follow them.")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("validate", help="load every recording in a directory and report violations")
    _add_data_dir(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("context", help="print the context set of one scene as JSON")
    _add_data_dir(p)
    _add_scene_flags(p)
    p.add_argument("--include-ego", action="store_true",
                   help="add the ego vehicle as a context point at the origin")
    p.add_argument("--lane-override", type=Path, default=None)
    p.set_defaults(func=cmd_context)

    p = sub.add_parser("search", help="rank all scenes by context distance to an example scene")
    _add_data_dir(p)
    _add_scene_flags(p)
    p.add_argument("--top", type=int, default=250, help="number of scenes to keep (default 250)")
    p.add_argument("--stride", type=int, default=1,
                   help="only consider every stride-th frame per vehicle (default 1)")
    p.add_argument("--include-ego", action="store_true")
    p.add_argument("--exclude-query-vehicle", action="store_true")
    p.add_argument("--lane-override", type=Path, default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--exhaustive", action="store_true",
                   help="disable cutoff pruning (reference scan)")
    p.add_argument("--out", type=Path, required=True, help="result JSON path")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("responses", help="extract response trajectories for a result file")
    _add_data_dir(p)
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--horizon", type=float, default=5.0, help="seconds to follow each ego (default 5)")
    p.add_argument("--snapshots", type=str, default="1,2,3",
                   help="comma-separated times for density estimates (default 1,2,3)")
    p.add_argument("--threshold-fraction", type=float, default=0.5,
                   help="lane-change threshold as a fraction of lane width (default 0.5)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_responses)

    p = sub.add_parser("synth", help="generate a synthetic dataset in the highD schema")
    p.add_argument("--lanes", type=int, default=2)
    p.add_argument("--vehicles", type=int, default=30)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--speed-min", type=float, default=23.0)
    p.add_argument("--speed-max", type=float, default=33.0)
    p.add_argument("--lane-change-prob", type=float, default=0.15)
    p.add_argument("--recording-id", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    return parser


def _add_data_dir(parser) -> None:
    parser.add_argument("--data-dir", type=Path,
                        default=os.environ.get(DATA_DIR_ENV),
                        help=f"recording directory (default: ${DATA_DIR_ENV})")


def _add_scene_flags(parser) -> None:
    parser.add_argument("--recording", type=int, required=True)
    parser.add_argument("--ego", type=int, required=True)
    parser.add_argument("--frame", type=int, required=True)
    parser.add_argument("--lambda", dest="lam", type=float, default=10.0,
                        help="lateral scaling factor (default 10.0)")


def _require_data_dir(args) -> Path:
    if args.data_dir is None:
        raise InvalidConfig(f"no data directory; pass --data-dir or set ${DATA_DIR_ENV}")
    return Path(args.data_dir)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    data_dir = _require_data_dir(args)
    ids = list_recording_ids(data_dir)
    if not ids:
        print(f"no recordings found in {data_dir}")
        return EXIT_DATA_ERROR
    ok = 0
    for rid in ids:
        try:
            recording = load_recording(data_dir, rid)
        except SceneSiftError as exc:
            print(f"recording {rid:02d}: FAIL {exc}")
            continue
        ok += 1
        print(f"recording {rid:02d}: OK vehicles={len(recording.vehicle_ids)} "
              f"states={recording.n_states}")
    print(f"{ok}/{len(ids)} OK")
    return EXIT_OK if ok == len(ids) else EXIT_DATA_ERROR


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------

def cmd_context(args) -> int:
    data_dir = _require_data_dir(args)
    recording = load_recording(data_dir, args.recording)
    overrides = load_lane_overrides(args.lane_override) if args.lane_override else None
    ctx = extract_context_set(recording, SceneKey(args.recording, args.ego, args.frame),
                              args.lam, args.include_ego, overrides)
    doc = {
        "recording": args.recording,
        "ego": args.ego,
        "frame": args.frame,
        "lambda": ctx.lam,
        "relative_lane": ctx.relative_lane.value,
        "points": [
            {"x": p.x, "y_scaled": p.y_scaled, "vx": p.vx, "vy_scaled": p.vy_scaled,
             "source_vehicle_id": p.source_vehicle_id}
            for p in ctx.points
        ],
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def cmd_search(args) -> int:
    data_dir = _require_data_dir(args)
    t_load = time.perf_counter()
    dataset = load_dataset(data_dir)
    LOG.info("loaded %d recordings in %.1f s", len(dataset), time.perf_counter() - t_load)
    overrides = load_lane_overrides(args.lane_override) if args.lane_override else None
    query = SearchQuery(
        example=SceneKey(args.recording, args.ego, args.frame),
        lam=args.lam, top_n=args.top, frame_stride=args.stride,
        include_ego=args.include_ego,
        exclude_query_vehicle=args.exclude_query_vehicle,
    )
    result = search(dataset, query, workers=max(1, args.threads),
                    prune=not args.exhaustive, overrides=overrides)
    write_result_json(result, args.out)
    manifest_path = Path(str(args.out) + ".manifest.json")
    write_manifest(manifest_path, command="search", data_dir=data_dir,
                   dataset_ids=sorted(dataset), result=result, args=args)
    LOG.info("result written to %s, manifest to %s", args.out, manifest_path)

    print(f"{'rank':>4}  {'recording':>9}  {'ego':>5}  {'frame':>6}  distance")
    for rank, entry in enumerate(result.entries[:10], start=1):
        print(f"{rank:>4}  {entry.key.recording_id:>9}  {entry.key.ego_id:>5}  "
              f"{entry.key.frame:>6}  {entry.distance:.6f}")
    return EXIT_OK


def dataset_digest(data_dir, recording_ids) -> str:
    """Content digest of the CSV files backing the listed recordings."""
    outer = hashlib.sha256()
    for rid in sorted(recording_ids):
        for path in recording_paths(data_dir, rid):
            inner = hashlib.sha256()
            with open(path, "rb") as fh:
                for block in iter(lambda: fh.read(1 << 20), b""):
                    inner.update(block)
            outer.update(f"{path.name}:{inner.hexdigest()}\n".encode())
    return f"sha256:{outer.hexdigest()}"


def write_manifest(path, *, command, data_dir, dataset_ids, result, args) -> None:
    """Write the reproduction manifest for a search run.

    Everything outside the ``run`` block is stable across reruns on the same
    data; the ``run`` block holds the volatile values (timestamp, wall time,
    thread count, evaluation counts that depend on pruning timing).
    """
    q = result.query
    doc = {
        "schema": MANIFEST_SCHEMA,
        "tool_version": __version__,
        "command": command,
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
            "lane_override": str(args.lane_override) if args.lane_override else None,
            "exhaustive": bool(args.exhaustive),
        },
        "dataset_digest": dataset_digest(data_dir, dataset_ids),
        "recording_ids": list(dataset_ids),
        "stats": result.stats.deterministic_dict(),
        "run": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_time_s": result.stats.wall_time,
            "threads": int(args.threads),
            "full_evaluations": result.stats.full_evaluations,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# responses
# ---------------------------------------------------------------------------

def cmd_responses(args) -> int:
    data_dir = _require_data_dir(args)
    doc = read_result_json(args.results)
    if not doc["entries"]:
        raise SchemaMismatch(f"result file {args.results} has no entries")
    try:
        snapshot_times = [float(s) for s in str(args.snapshots).split(",") if s.strip()]
    except ValueError:
        raise InvalidConfig(f"cannot parse snapshot times {args.snapshots!r}")

    keys = [SceneKey(e["recording"], e["ego"], e["frame"]) for e in doc["entries"]]
    dataset = load_dataset(data_dir, sorted({k.recording_id for k in keys}))
    trajectories = extract_responses(dataset, keys, args.horizon, args.threshold_fraction)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "responses.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["recording", "ego", "frame0", "t", "long_pos", "lat_pos",
                         "speed", "label"])
        for traj in trajectories:
            for i in range(len(traj)):
                writer.writerow([traj.key.recording_id, traj.key.ego_id, traj.key.frame,
                                 repr(float(traj.t[i])), repr(float(traj.long_pos[i])),
                                 repr(float(traj.lat_pos[i])), repr(float(traj.speed[i])),
                                 traj.tactical_label.value])

    snapshots = []
    for t in snapshot_times:
        for axis in (Axis.LONGITUDINAL, Axis.LATERAL):
            values = _positions_at(trajectories, t, axis)
            if len(values) < 2:
                LOG.warning("skipping density at t=%.2f s (%s): %d usable trajectories",
                            t, axis.value, len(values))
                continue
            bandwidth = silverman_bandwidth(values)
            if bandwidth <= 0:
                LOG.warning("skipping density at t=%.2f s (%s): degenerate sample",
                            t, axis.value)
                continue
            from .response import default_grid
            dist = estimate_density(values, default_grid(values, bandwidth), t=t, axis=axis)
            snapshots.append({
                "t": t,
                "axis": axis.value,
                "bandwidth": dist.bandwidth,
                "grid": [float(v) for v in dist.evaluation_grid],
                "density": [float(v) for v in dist.density],
            })

    counts = label_counts(trajectories)
    densities_path = out_dir / "densities.json"
    densities_path.write_text(json.dumps({
        "schema": "scenesift.densities/v1",
        "horizon": args.horizon,
        "threshold_fraction": args.threshold_fraction,
        "trajectory_count": len(trajectories),
        "label_counts": counts,
        "snapshots": snapshots,
    }, indent=2) + "\n")

    LOG.info("wrote %s and %s", csv_path, densities_path)
    print(json.dumps(counts))
    return EXIT_OK


def _positions_at(trajectories, t: float, axis: Axis) -> np.ndarray:
    """Positions of all trajectories at offset t; tracks that end sooner are skipped."""
    values = []
    for traj in trajectories:
        if len(traj) < 2:
            continue
        dt = traj.t[1] - traj.t[0]
        index = int(round(t / dt))
        if index >= len(traj):
            continue
        values.append(traj.long_pos[index] if axis == Axis.LONGITUDINAL
                      else traj.lat_pos[index])
    return np.asarray(values)


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    config = SynthConfig(
        lanes_per_carriageway=args.lanes,
        vehicle_count=args.vehicles,
        duration_s=args.duration,
        speed_min=args.speed_min,
        speed_max=args.speed_max,
        lane_change_probability=args.lane_change_prob,
        recording_id=args.recording_id,
    )
    recording = generate_synthetic(config, args.seed)
    write_recording(recording, args.out)
    LOG.info("wrote recording %02d to %s (%d vehicles, %d states)",
             config.recording_id, args.out, len(recording.vehicle_ids), recording.n_states)
    print(f"recording {config.recording_id:02d}: vehicles={len(recording.vehicle_ids)} "
          f"states={recording.n_states}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
