"""Pointwise curvature from local PCA frames and quadratic hypersurface fits.

At each point the neighborhood covariance (about the neighbor centroid) is
eigendecomposed; the top-m eigenvectors span the tangent frame and the
normal is the eigenvector of the smallest eigenvalue above a relative rank
tolerance (falling back to eigenvector m+1 when every eigenvalue beyond
the tangent block vanishes, e.g. exactly flat data). Neighbors are then
expressed in tangent coordinates o_j and normal heights t_j, and a pure
quadratic height model

    t ~ (1/2) * sum_ab theta[a, b] * o[a] * o[b]

is fit by least squares over all m^2 coefficient slots. The curvature at
the point is det(theta) of the symmetrized coefficient matrix, which for a
2-D tangent frame is the classical Gaussian curvature of the fitted graph;
for other m it is the determinant of the fitted quadratic-form matrix
(a Gauss-curvature proxy). The manifold-level complexity is the plain mean
of the pointwise values; the mean of absolute values is reported alongside
because sign conventions of the normal are arbitrary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DegenerateFrameError, ParameterError, ValidationError
from .pointcloud import NeighborGraph, PointCloud

# An eigenvalue is "zero" when below this fraction of the largest one.
RANK_TOL = 1e-10

# Ridge scale for the normal-equations solve. The m^2-column design
# duplicates symmetric slots and is therefore exactly rank-deficient; a
# tiny ridge keeps the solve defined while staying far below the least-
# squares oracle tolerance. The null-space component it admits is purely
# antisymmetric and is removed by the final symmetrization.
RIDGE_SCALE = 1e-12


def default_neighbor_count(m: int) -> int:
    """Neighbor count that keeps the m^2-slot fit overdetermined."""
    return max(20, m * m + 5)


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal tangent basis, normal, and covariance spectrum at a point."""

    center: np.ndarray
    tangent_basis: np.ndarray  # (m, p), rows orthonormal
    normal: np.ndarray  # (p,), unit, orthogonal to the tangent rows
    eigenvalues: np.ndarray  # (p,), descending, nonnegative


@dataclass(frozen=True)
class CurvatureEstimates:
    """Pointwise curvature values plus their aggregates."""

    values: np.ndarray
    m: int
    k: int
    mean_curvature: float
    mean_abs_curvature: float
    skipped: int

    @classmethod
    def from_values(cls, values, m, k, skipped) -> "CurvatureEstimates":
        vals = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
        vals.setflags(write=False)
        return cls(
            values=vals,
            m=m,
            k=k,
            mean_curvature=float(vals.mean()),
            mean_abs_curvature=float(np.abs(vals).mean()),
            skipped=skipped,
        )


def _frame_from_neighbors(nbrs: np.ndarray, center: np.ndarray, m: int) -> LocalFrame:
    k, p = nbrs.shape
    if not 1 <= m < p:
        raise ParameterError(f"tangent dimension must satisfy 1 <= m < p={p}, got {m}")
    if k < m + 1:
        raise ParameterError(f"need k >= m+1 neighbors for an m={m} frame, got k={k}")
    y = nbrs - nbrs.mean(axis=0)
    # Right singular vectors of Y are the covariance eigenvectors; squared
    # singular values are its eigenvalues (nonnegative by construction).
    _, sing, vt = np.linalg.svd(y, full_matrices=True)
    eig = np.zeros(p)
    eig[: sing.shape[0]] = sing**2
    if eig[0] <= 0.0:
        raise DegenerateFrameError("all covariance eigenvalues vanish (coincident neighbors)")
    tol = RANK_TOL * eig[0]
    above = np.nonzero(eig > tol)[0]
    # Smallest eigenvalue still above the rank tolerance, but never inside
    # the tangent block; for exactly flat data (everything beyond the
    # tangent block is zero) fall back to eigenvector m+1.
    normal_idx = max(int(above[-1]), m)
    basis = vt[:m]
    normal = vt[normal_idx]
    # Deterministic sign: largest-magnitude component positive.
    pivot = int(np.argmax(np.abs(normal)))
    if normal[pivot] < 0:
        normal = -normal
    return LocalFrame(
        center=center.copy(),
        tangent_basis=basis.copy(),
        normal=normal,
        eigenvalues=eig,
    )


def local_frame(cloud: PointCloud, graph: NeighborGraph, point: int, m: int) -> LocalFrame:
    """PCA frame at one point from its graph neighborhood."""
    nbrs = cloud.points[graph.indices[point]]
    return _frame_from_neighbors(nbrs, cloud.points[point], m)


def fit_quadratic_form(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Ridge-stabilized normal-equations solve of design @ theta ~ target."""
    m2 = design.shape[1]
    gram = design.T @ design
    ridge = RIDGE_SCALE * np.trace(gram) / m2
    gram[np.diag_indices(m2)] += ridge
    return np.linalg.solve(gram, design.T @ target)


def _curvature_from_frame(diff: np.ndarray, frame: LocalFrame, m: int) -> float:
    o = diff @ frame.tangent_basis.T  # (k, m) tangent coordinates
    t = diff @ frame.normal  # (k,) normal heights
    # All m^2 slots, columns (a, b) and (b, a) intentionally duplicated;
    # the 1/2 belongs to the height model.
    design = 0.5 * (o[:, :, None] * o[:, None, :]).reshape(o.shape[0], m * m)
    theta = fit_quadratic_form(design, t)
    theta = theta.reshape(m, m)
    theta = 0.5 * (theta + theta.T)
    return float(np.linalg.det(theta))


def gaussian_curvature_at(
    cloud: PointCloud, graph: NeighborGraph, point: int, m: int
) -> float:
    """Curvature proxy det(theta) at a single point."""
    frame = local_frame(cloud, graph, point, m)
    diff = cloud.points[graph.indices[point]] - cloud.points[point]
    value = _curvature_from_frame(diff, frame, m)
    if not np.isfinite(value):
        raise ValidationError(f"curvature fit at point {point} is not finite")
    return value


def resolve_tangent_dim(cloud: PointCloud, graph: NeighborGraph, m: Union[int, str]) -> int:
    """Resolve an explicit or "auto" tangent dimension.

    "auto" rounds the global TLE intrinsic dimension and clamps it to
    [1, p-1].
    """
    if m == "auto":
        from .intrinsic_dim import global_id, local_id_tle

        est = global_id(local_id_tle(cloud, graph))
        return int(np.clip(round(est), 1, max(1, cloud.p - 1)))
    m = int(m)
    if m < 1:
        raise ParameterError(f"tangent dimension must be >= 1, got {m}")
    return m


def curvature_profile(
    cloud: PointCloud,
    graph: NeighborGraph,
    m: Union[int, str] = "auto",
) -> tuple[CurvatureEstimates, Optional[str]]:
    """Pointwise curvatures for the whole cloud plus mean aggregates.

    Returns the estimates and an optional warning (set when more than 20%
    of the points had degenerate fits and were skipped). Skipped points are
    excluded from the aggregates and from `values`.
    """
    m_resolved = resolve_tangent_dim(cloud, graph, m)
    if m_resolved >= cloud.p:
        raise ParameterError(
            f"tangent dimension m={m_resolved} must be below ambient dimension p={cloud.p}"
        )
    pts = cloud.points
    values = []
    skipped = 0
    for i in range(cloud.n):
        nbrs = pts[graph.indices[i]]
        try:
            frame = _frame_from_neighbors(nbrs, pts[i], m_resolved)
        except DegenerateFrameError:
            skipped += 1
            continue
        value = _curvature_from_frame(nbrs - pts[i], frame, m_resolved)
        if np.isfinite(value):
            values.append(value)
        else:
            skipped += 1
    if not values:
        raise ValidationError("curvature fit failed at every point")
    warning = None
    if skipped > 0.2 * cloud.n:
        warning = f"curvature fit skipped {skipped}/{cloud.n} points"
    estimates = CurvatureEstimates.from_values(values, m_resolved, graph.k, skipped)
    return estimates, warning
