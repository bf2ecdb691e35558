"""Hausdorff distance between context sets.

All kernels share one point-to-point distance: squared differences
accumulated in field order (x, y, vx, vy), then a square root. Because every
kernel performs exactly those IEEE-754 double operations per pair, the
vectorised and early-exit variants return bit-identical values to the plain
double loop, and cutoff comparisons can be exact without epsilons.

Units are mixed on purpose (m and m/s, lateral components pre-scaled); the
norm is Euclidean over the 4 fields.
"""

from __future__ import annotations

import math

import numpy as np

from .context import ContextSet
from .errors import EmptySet, LambdaMismatch


def _check(a: ContextSet, b: ContextSet) -> None:
    if len(a.points) == 0 or len(b.points) == 0:
        raise EmptySet("set distance is undefined for empty sets")
    if a.lam != b.lam:
        raise LambdaMismatch(f"lateral scaling differs: {a.lam} vs {b.lam}")


def directed_hausdorff(a: ContextSet, b: ContextSet) -> float:
    """max over points of ``a`` of the distance to the nearest point of ``b``."""
    _check(a, b)
    return directed_hausdorff_points(a.values, b.values)


def hausdorff(a: ContextSet, b: ContextSet) -> float:
    """Symmetric Hausdorff distance; the sets may have different sizes."""
    _check(a, b)
    return hausdorff_points(a.values, b.values)


def hausdorff_bounded(a: ContextSet, b: ContextSet, cutoff: float):
    """Exact distance if it is <= cutoff, else None.

    The scan stops as soon as any point's nearest-neighbour distance proves
    the final value exceeds the cutoff, which is what makes batch search
    with a shrinking cutoff cheap.
    """
    _check(a, b)
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    return hausdorff_bounded_points(a.values, b.values, cutoff)


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------

def pair_distance(p, q) -> float:
    """4-D point distance with the mandated accumulation order."""
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dvx = p[2] - q[2]
    dvy = p[3] - q[3]
    acc = dx * dx
    acc += dy * dy
    acc += dvx * dvx
    acc += dvy * dvy
    return math.sqrt(acc)


def directed_hausdorff_points(pa, pb) -> float:
    """Reference directed scan over raw (n, 4) arrays."""
    # Plain Python floats make the scan several times faster than indexing
    # numpy rows; the arithmetic is identical C doubles either way.
    pa = np.asarray(pa).tolist()
    pb = np.asarray(pb).tolist()
    worst = 0.0
    for p in pa:
        best = math.inf
        for q in pb:
            d = pair_distance(p, q)
            if d < best:
                best = d
        if best > worst:
            worst = best
    return worst


def hausdorff_points(pa, pb) -> float:
    d_ab = directed_hausdorff_points(pa, pb)
    d_ba = directed_hausdorff_points(pb, pa)
    return d_ab if d_ab >= d_ba else d_ba


def hausdorff_bounded_points(pa, pb, cutoff: float):
    """Early-exit scan; exact value if <= cutoff, else None.

    Two exits keep the value exact: a point whose completed nearest-neighbour
    distance exceeds the cutoff ends the whole computation (the max can only
    grow), and an inner scan may stop once it finds a pair at or below the
    running max (such a point can never raise the max). Breaking the inner
    scan on the cutoff instead would corrupt the returned value, so it is
    never done.
    """
    pa = np.asarray(pa).tolist()
    pb = np.asarray(pb).tolist()
    running = 0.0
    for outer, inner in ((pa, pb), (pb, pa)):
        for p in outer:
            best = math.inf
            for q in inner:
                d = pair_distance(p, q)
                if d <= running:
                    best = d
                    break
                if d < best:
                    best = d
            if best > running:
                running = best
                if running > cutoff:
                    return None
    return running


_CHUNK_ROWS = 16384


def hausdorff_many(query: np.ndarray, stack: np.ndarray,
                   cutoff: float = math.inf) -> np.ndarray:
    """Distances between one query set and a stack of same-size candidate sets.

    ``query`` is (m, 4), ``stack`` is (B, n, 4). Returns a (B,) array holding
    the exact Hausdorff distance where it is <= cutoff and +inf where it
    provably exceeds the cutoff. A one-row lower bound (nearest candidate
    point to the first query point) screens candidates before the full
    pairwise matrix is evaluated; survivors are computed in full, with the
    same per-pair operation order as the scalar kernels.
    """
    stack = np.asarray(stack, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    b = stack.shape[0]
    out = np.full(b, np.inf)
    for lo in range(0, b, _CHUNK_ROWS):
        chunk = stack[lo:lo + _CHUNK_ROWS]
        out[lo:lo + _CHUNK_ROWS] = _hausdorff_chunk(query, chunk, cutoff)
    return out


def _pair_matrix(query: np.ndarray, chunk: np.ndarray) -> np.ndarray:
    diff = query[None, :, None, :] - chunk[:, None, :, :]
    acc = diff[..., 0] * diff[..., 0]
    acc += diff[..., 1] * diff[..., 1]
    acc += diff[..., 2] * diff[..., 2]
    acc += diff[..., 3] * diff[..., 3]
    return np.sqrt(acc)


def _hausdorff_chunk(query: np.ndarray, chunk: np.ndarray, cutoff: float) -> np.ndarray:
    b = chunk.shape[0]
    if b == 0:
        return np.zeros(0)
    if np.isfinite(cutoff):
        diff0 = chunk - query[0]
        acc = diff0[..., 0] * diff0[..., 0]
        acc += diff0[..., 1] * diff0[..., 1]
        acc += diff0[..., 2] * diff0[..., 2]
        acc += diff0[..., 3] * diff0[..., 3]
        lower = np.sqrt(acc).min(axis=1)
        alive = lower <= cutoff
        if not alive.any():
            return np.full(b, np.inf)
    else:
        alive = np.ones(b, dtype=bool)

    result = np.full(b, np.inf)
    dmat = _pair_matrix(query, chunk[alive])      # (B_alive, m, n)
    to_candidate = dmat.min(axis=2).max(axis=1)
    to_query = dmat.min(axis=1).max(axis=1)
    values = np.maximum(to_candidate, to_query)
    values[values > cutoff] = np.inf
    result[alive] = values
    return result
