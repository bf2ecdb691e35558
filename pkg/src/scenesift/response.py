"""Driver responses that evolve from retrieved scenes.

For each scene the ego trajectory is followed from the scene frame for a
fixed horizon, normalized so that longitudinal position starts at zero and
lateral position is measured from the center of the lane the ego occupied
at the scene frame (positive toward the driver's left). A trajectory whose
peak lateral offset passes a threshold (half the lane width by default) is
a lane change; otherwise the driver kept the lane.

Distributions of the longitudinal and lateral positions at fixed time
offsets are estimated with a Gaussian kernel density estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .context import SceneKey
from .dataset import Recording, direction_sign
from .errors import DegenerateSample, UnknownScene


class TacticalLabel(Enum):
    LANE_KEEP = "LaneKeep"
    LANE_CHANGE_LEFT = "LaneChangeLeft"
    LANE_CHANGE_RIGHT = "LaneChangeRight"
    TRUNCATED = "Truncated"


class Axis(Enum):
    LONGITUDINAL = "Longitudinal"
    LATERAL = "Lateral"


@dataclass
class ResponseTrajectory:
    """One ego trajectory from a scene frame onward, lane-centered."""

    key: SceneKey
    t: np.ndarray          # seconds since the scene frame, starts at 0
    long_pos: np.ndarray   # m forward of the position at the scene frame
    lat_pos: np.ndarray    # m left of the origin lane center
    speed: np.ndarray      # m/s, velocity magnitude
    horizon: float
    lane_width: float
    truncated: bool        # track ended before the requested horizon
    tactical_label: TacticalLabel

    def __len__(self) -> int:
        return len(self.t)


def classify_lateral_profile(lat_pos: np.ndarray, lane_width: float,
                             truncated: bool = False,
                             threshold_fraction: float = 0.5) -> TacticalLabel:
    """Label a lateral position series.

    A sample beyond +threshold is a left lane change, beyond -threshold a
    right one; when both sides are crossed the earlier crossing wins. A
    truncated series with no crossing cannot be confirmed as lane keeping
    and is labelled Truncated.
    """
    threshold = threshold_fraction * lane_width
    above = np.flatnonzero(lat_pos > threshold)
    below = np.flatnonzero(lat_pos < -threshold)
    first_above = above[0] if len(above) else None
    first_below = below[0] if len(below) else None
    if first_above is not None and (first_below is None or first_above <= first_below):
        return TacticalLabel.LANE_CHANGE_LEFT
    if first_below is not None:
        return TacticalLabel.LANE_CHANGE_RIGHT
    return TacticalLabel.TRUNCATED if truncated else TacticalLabel.LANE_KEEP


def classify_tactical(trajectory: "ResponseTrajectory", lane_width: float = None,
                      threshold_fraction: float = 0.5) -> TacticalLabel:
    """Label a trajectory; lane_width defaults to the trajectory's own."""
    if lane_width is None:
        lane_width = trajectory.lane_width
    return classify_lateral_profile(trajectory.lat_pos, lane_width,
                                    trajectory.truncated, threshold_fraction)


def extract_response(recording: Recording, key: SceneKey, horizon: float = 5.0,
                     threshold_fraction: float = 0.5) -> ResponseTrajectory:
    """Follow one ego vehicle from the scene frame for ``horizon`` seconds."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if key.recording_id != recording.meta.recording_id:
        raise UnknownScene(f"scene {key} queried against recording {recording.meta.recording_id}")
    row0 = recording.row_index(key.ego_id, key.frame)
    if row0 is None:
        raise UnknownScene(f"vehicle {key.ego_id} has no state at frame {key.frame} "
                           f"in recording {key.recording_id}")
    tm = recording.tracks_meta[key.ego_id]
    fps = recording.meta.frame_rate
    sigma = direction_sign(tm.driving_direction)

    horizon_frames = int(round(horizon * fps))
    last_frame = min(tm.final_frame, key.frame + horizon_frames)
    truncated = tm.final_frame < key.frame + horizon_frames
    rows = slice(row0, row0 + (last_frame - key.frame) + 1)

    lane_id0 = int(recording.lane_ids[row0])
    lo, hi = recording.lane_bounds(lane_id0)
    lane_width = hi - lo
    lane_mid = (lo + hi) / 2.0

    frames = recording.frames[rows]
    t = (frames - key.frame) / fps
    # + 0.0 turns the -0.0 that sigma flips produce at t=0 into a plain 0.0
    long_pos = sigma * (recording.center_x[rows] - recording.center_x[row0]) + 0.0
    lat_pos = -sigma * (recording.center_y[rows] - lane_mid)
    speed = np.hypot(recording.x_velocity[rows], recording.y_velocity[rows])

    label = classify_lateral_profile(lat_pos, lane_width, truncated, threshold_fraction)
    return ResponseTrajectory(key=key, t=t, long_pos=long_pos, lat_pos=lat_pos,
                              speed=speed, horizon=horizon, lane_width=lane_width,
                              truncated=truncated, tactical_label=label)


def extract_responses(dataset: Mapping[int, Recording], keys: Sequence[SceneKey],
                      horizon: float = 5.0,
                      threshold_fraction: float = 0.5) -> list[ResponseTrajectory]:
    out = []
    for key in keys:
        recording = dataset.get(key.recording_id)
        if recording is None:
            raise UnknownScene(f"recording {key.recording_id} not in dataset")
        out.append(extract_response(recording, key, horizon, threshold_fraction))
    return out


def label_counts(trajectories: Sequence[ResponseTrajectory]) -> dict[str, int]:
    counts = {label.value: 0 for label in TacticalLabel}
    for traj in trajectories:
        counts[traj.tactical_label.value] += 1
    return counts


# ---------------------------------------------------------------------------
# Kernel density estimation
# ---------------------------------------------------------------------------

@dataclass
class BehaviorDistribution:
    evaluation_grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    t: Optional[float] = None
    axis: Optional[Axis] = None


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(std, IQR / 1.34) * n^(-1/5)."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    sigma = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    return 0.9 * min(sigma, iqr / 1.34) * n ** (-0.2)


def estimate_density(values, grid, t: Optional[float] = None,
                     axis: Optional[Axis] = None) -> BehaviorDistribution:
    """Gaussian KDE of a 1-D sample, renormalized to integrate to 1 on the grid.

    Raises DegenerateSample when the Silverman bandwidth is zero (zero
    sample spread); the bandwidth is never widened silently.
    """
    values = np.asarray(values, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if len(values) < 2:
        raise ValueError(f"need at least two values, got {len(values)}")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    if len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")

    bandwidth = silverman_bandwidth(values)
    if bandwidth <= 0:
        raise DegenerateSample(
            f"sample of {len(values)} values has zero spread; bandwidth would be 0")

    u = (grid[:, None] - values[None, :]) / bandwidth
    kernel = np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    density = kernel.sum(axis=1) / (len(values) * bandwidth)
    mass = np.trapezoid(density, grid)
    if mass <= 0:
        raise DegenerateSample("no probability mass on the evaluation grid")
    density = density / mass
    return BehaviorDistribution(evaluation_grid=grid, density=density,
                                bandwidth=bandwidth, t=t, axis=axis)


def default_grid(values, bandwidth: float, points: int = 256) -> np.ndarray:
    """Evaluation grid spanning the sample plus four bandwidths of margin."""
    values = np.asarray(values, dtype=np.float64)
    pad = 4.0 * bandwidth
    return np.linspace(values.min() - pad, values.max() + pad, points)
