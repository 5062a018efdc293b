"""Point-cloud data model, file I/O, exact k-nearest neighbors, diameter.

A cloud is an (n, p) float64 array of row vectors. All distances are
Euclidean. kNN is exact (full pairwise distances, blocked for memory);
ties are broken by ascending point index and the point itself is excluded.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError, ParameterError, ValidationError

_MAGIC = b"PMG1"

# Target element count for one pairwise-distance block (block * n * p),
# keeping the broadcast temporaries around a few hundred MB at most.
_BLOCK_ELEMS = 2 ** 25


def _block_rows(n: int, p: int) -> int:
    return max(1, min(n, _BLOCK_ELEMS // max(1, n * p)))


@dataclass(frozen=True)
class PointCloud:
    """Immutable set of n points in R^p with an optional class label."""

    points: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValidationError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"need n >= 1 and p >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite values")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class NeighborGraph:
    """Per-point k nearest neighbors: (n, k) index and distance arrays.

    distances[i] is ascending and distances[i][j] is the exact Euclidean
    distance from point i to point indices[i][j].
    """

    k: int
    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        dist = np.ascontiguousarray(np.asarray(self.distances, dtype=np.float64))
        idx.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", dist)


def _parse_csv(path: Path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = [t.strip() for t in line.split(",")]
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                if lineno == 1 and not rows:
                    # Header row of non-numeric tokens: skip it.
                    continue
                raise FormatError(f"{path}: line {lineno}: non-numeric value")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FormatError(
                    f"{path}: line {lineno}: expected {width} values, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _parse_binary(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != _MAGIC:
        raise FormatError(f"{path}: not a {_MAGIC.decode()} binary cloud")
    n, p = struct.unpack("<II", raw[4:12])
    expected = 12 + 8 * n * p
    if n < 1 or p < 1 or len(raw) != expected:
        raise FormatError(
            f"{path}: header says n={n}, p={p} but file has {len(raw)} bytes"
        )
    data = np.frombuffer(raw, dtype="<f8", count=n * p, offset=12)
    return data.reshape(n, p).astype(np.float64, copy=True)


def load_point_cloud(path, format: str = "auto", label: Optional[str] = None) -> PointCloud:
    """Load a cloud from CSV (one point per row) or the PMG1 binary format.

    format "auto" sniffs the binary magic; anything else is parsed as CSV.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"input file not found: {path}")
    if format == "auto":
        with open(path, "rb") as fh:
            format = "binary" if fh.read(4) == _MAGIC else "csv"
    if format == "csv":
        pts = _parse_csv(path)
    elif format == "binary":
        pts = _parse_binary(path)
    else:
        raise ParameterError(f"unknown format {format!r} (expected csv or binary)")
    if not np.all(np.isfinite(pts)):
        raise ValidationError(f"{path}: non-finite coordinate")
    return PointCloud(pts, label=label if label is not None else path.stem)


def save_point_cloud(cloud: PointCloud, path, format: str = "csv") -> None:
    """Write a cloud to CSV or to PMG1 binary (bit-exact round trip)."""
    path = Path(path)
    if format == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            for row in cloud.points:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    elif format == "binary":
        buf = io.BytesIO()
        buf.write(_MAGIC)
        buf.write(struct.pack("<II", cloud.n, cloud.p))
        buf.write(np.ascontiguousarray(cloud.points, dtype="<f8").tobytes())
        path.write_bytes(buf.getvalue())
    else:
        raise ParameterError(f"unknown format {format!r} (expected csv or binary)")


def _pairwise_block(block: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Exact distances from each row of `block` to every point.

    Kept as an elementwise square + last-axis sum so the result is
    bit-identical to the scalar formula sqrt(((a - b) ** 2).sum()).
    """
    diff = block[:, None, :] - pts[None, :, :]
    return np.sqrt((diff * diff).sum(-1))


def knn(cloud: PointCloud, k: int) -> NeighborGraph:
    """Exact Euclidean k nearest neighbors for every point.

    Ties are broken by ascending point index; the point itself is excluded.
    Duplicate points are allowed, so zero distances can appear.
    """
    n = cloud.n
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= n-1 = {n - 1}, got {k}")
    pts = cloud.points
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    step = _block_rows(n, cloud.p)
    for start in range(0, n, step):
        stop = min(start + step, n)
        dist = _pairwise_block(pts[start:stop], pts)
        dist[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        # stable sort on distance keeps ascending-index order within ties
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        indices[start:stop] = order
        distances[start:stop] = np.take_along_axis(dist, order, axis=1)
    return NeighborGraph(k=k, indices=indices, distances=distances)


def diameter(cloud: PointCloud) -> float:
    """Maximum pairwise distance; 0.0 for a single point."""
    if cloud.n == 1:
        return 0.0
    pts = cloud.points
    best = 0.0
    step = _block_rows(cloud.n, cloud.p)
    for start in range(0, cloud.n, step):
        stop = min(start + step, cloud.n)
        dist = _pairwise_block(pts[start:stop], pts)
        best = max(best, float(dist.max()))
    return best
