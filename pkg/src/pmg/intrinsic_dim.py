"""Local and global intrinsic-dimension estimation from kNN distances.

Two per-point estimators are provided. The MLE estimator inverts the mean
log-ratio of neighbor distances:

    id_mle(x) = -( (1/k) * sum_j ln(r_j / r_k) )^-1

The tight-locality estimator (TLE) averages log-ratios over ordered pairs
of distinct neighbors, using the directional distance induced at the
center x by the pair (v, w),

    d_x(v, w) = r_k * |w - v|^2 / (2 (x - v) . (w - v))

and, for each pair, also the term with v reflected through x. A pair's
distance estimate is only meaningful inside the neighborhood: estimates
at or beyond r_k (including the divergent case where the denominator is
not positive) are censored at r_k, contributing ln(1) = 0. Pairs of
coincident neighbors are dropped, and the normalizer is the count of
retained pairs. Pairs involving the center itself are degenerate (the
v = x estimate diverges and the w = x estimate is the constant r_k / 2
regardless of the data) and are excluded. Both estimators depend only on
distance ratios, so they are invariant under rigid motion and scaling.

Per-point estimates that remain undefined (too few usable neighbors, or a
vanishing log-sum) are imputed with the mean of the defined ones and
counted in `skipped`, so the global average stays a plain mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .pointcloud import NeighborGraph, PointCloud

DEFAULT_K = 20

# Points per vectorized TLE block; bounds the (block, k+1, k+1) temporaries.
_TLE_BLOCK = 512


@dataclass(frozen=True)
class LocalIdEstimates:
    """Per-point intrinsic-dimension estimates for one cloud."""

    method: str
    values: np.ndarray
    k: int
    skipped: int

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def _finalize(method: str, raw: np.ndarray, defined: np.ndarray, k: int) -> LocalIdEstimates:
    skipped = int(np.count_nonzero(~defined))
    if skipped == raw.shape[0]:
        raise ValidationError(
            f"{method}: no point produced a defined estimate (degenerate cloud)"
        )
    values = raw.copy()
    if skipped:
        values[~defined] = raw[defined].mean()
    return LocalIdEstimates(method=method, values=values, k=k, skipped=skipped)


def local_id_mle(cloud: PointCloud, graph: NeighborGraph) -> LocalIdEstimates:
    """Per-point MLE intrinsic dimension.

    Zero-distance neighbors (duplicate points) are excluded from the sum
    with the local k reduced accordingly; a point needs at least 2 usable
    neighbors and a nonzero log-sum to be defined.
    """
    if graph.k < 2:
        raise ParameterError(f"MLE needs k >= 2, got k={graph.k}")
    dist = graph.distances
    n = dist.shape[0]
    raw = np.zeros(n)
    defined = np.zeros(n, dtype=bool)
    pos = dist > 0.0
    counts = pos.sum(axis=1)
    # r_k per point over the usable neighbors = largest positive distance
    with np.errstate(divide="ignore", invalid="ignore"):
        r_k = np.where(counts > 0, dist[:, -1], np.nan)
        log_ratio = np.where(pos, np.log(dist / r_k[:, None]), 0.0)
    sums = log_ratio.sum(axis=1)
    ok = (counts >= 2) & (sums < 0.0)
    raw[ok] = -counts[ok] / sums[ok]
    defined[ok] = np.isfinite(raw[ok]) & (raw[ok] > 0.0)
    return _finalize("mle", raw, defined, graph.k)


def local_id_tle(cloud: PointCloud, graph: NeighborGraph) -> LocalIdEstimates:
    """Per-point TLE intrinsic dimension over ordered neighbor pairs."""
    if graph.k < 2:
        raise ParameterError(f"TLE needs k >= 2, got k={graph.k}")
    pts = cloud.points
    n = cloud.n
    raw = np.zeros(n)
    defined = np.zeros(n, dtype=bool)
    for start in range(0, n, _TLE_BLOCK):
        stop = min(start + _TLE_BLOCK, n)
        sums, counts = _tle_block_at(pts, graph.indices[start:stop], start)
        ok = (counts >= 2) & (sums < 0.0)
        est = np.where(ok, -counts / np.where(sums != 0.0, sums, 1.0), 0.0)
        good = ok & np.isfinite(est) & (est > 0.0)
        raw[start:stop] = est
        defined[start:stop] = good
    return _finalize("tle", raw, defined, graph.k)


def _censored_log_ratio(S: np.ndarray, D: np.ndarray) -> np.ndarray:
    """ln(min(d, r_k) / r_k) for d / r_k = S / D, with d := +inf when the
    denominator is not positive. Always <= 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.log(S / D)
    t = np.where((S > 0.0) & (D > 0.0) & np.isfinite(t), t, 0.0)
    return np.minimum(t, 0.0)


def _tle_block_at(pts: np.ndarray, idx: np.ndarray, start: int):
    """TLE log-sums and retained-pair counts for one block of points.

    Everything is expressed through the Gram matrix of centered neighbor
    offsets B_j = x_j - center, which keeps the pair terms free of
    large-coordinate cancellation:

        |w - v|^2                     = b_v + b_w - 2 G[v, w]
        2 (x - v).(w - v)             = 2 (b_v - G[v, w])
        |w - (2x - v)|^2              = b_v + b_w + 2 G[v, w]
        2 (x - (2x - v)).(w - (2x-v)) = 2 (b_v + G[v, w])

    The d/r_k ratios are the quotients of the first/second and third/fourth
    lines, so r_k cancels exactly.
    """
    centers = pts[start : start + idx.shape[0]]
    B = pts[idx] - centers[:, None, :]  # (m, k, p) neighbor offsets
    G = B @ B.transpose(0, 2, 1)
    b = np.einsum("mqq->mq", G).copy()
    bv = b[:, :, None]
    bw = b[:, None, :]
    S1 = bv + bw - 2.0 * G
    D1 = 2.0 * (bv - G)
    S2 = bv + bw + 2.0 * G
    D2 = 2.0 * (bv + G)
    term = _censored_log_ratio(S1, D1) + _censored_log_ratio(S2, D2)
    # retained pairs: ordered, distinct neighbor positions (S1 > 0)
    retained = S1 > 0.0
    k = B.shape[1]
    diag = np.arange(k)
    retained[:, diag, diag] = False
    sums = np.where(retained, term, 0.0).sum(axis=(1, 2))
    counts = retained.sum(axis=(1, 2))
    return sums, counts


def global_id(local: LocalIdEstimates) -> float:
    """Global intrinsic dimension: arithmetic mean of the local estimates."""
    if local.values.size == 0:
        raise ValidationError("no local estimates to average")
    return float(local.values.mean())
