"""Vietoris-Rips filtrations and H0/H1 persistence over Z/2.

H0 comes from a union-find sweep over the sorted edge list (every vertex
is born at 0; each component merge kills one class at the merging edge's
length; surviving components are essential). H1 comes from reducing the
triangle boundary matrix against the edges, processing triangle columns
in filtration order. Two facts keep that reduction small and correct:

* Every intermediate column is a 1-cycle (a Z/2 sum of triangle
  boundaries), and the maximal edge of a cycle always closes it, so
  column lows land only on cycle-creating ("positive") edges; tree edges
  never pair with triangles. The union-find pass therefore fully replaces
  the edge-column reduction, which is the practical form of clearing for
  a two-dimensional filtration.

* Once some vertex is within epsilon of every other vertex, the complex
  is a cone and stays contractible, so no H1 class can survive past the
  enclosing radius R = min_i max_j d(i, j), and classes born at or beyond
  R die instantly. Triangles are only enumerated up to
  min(epsilon_max, R); positive edges at or beyond R are dropped as
  zero-persistence, and unpaired positive edges below the cutoff are
  essential (possible only when epsilon_max < R).

Equal-length simplices are ordered lexicographically by vertex indices,
which makes diagrams deterministic. Clouds larger than max_points are
deterministically subsampled before filtration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..errors import ParameterError, PmgError
from ..pointcloud import PointCloud, _block_rows, _pairwise_block, diameter

DEFAULT_MAX_POINTS = 1000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class Filtration:
    """Sorted edge list of a Vietoris-Rips filtration capped at epsilon_max."""

    vertex_count: int
    edge_i: np.ndarray  # (E,) int64, edge_i < edge_j
    edge_j: np.ndarray
    edge_length: np.ndarray  # (E,) float64, sorted by (length, i, j)
    epsilon_max: float

    @property
    def edge_count(self) -> int:
        return int(self.edge_length.shape[0])

    def edges(self):
        """Iterate (i, j, length) tuples in filtration order."""
        for a, b, ln in zip(self.edge_i, self.edge_j, self.edge_length):
            yield int(a), int(b), float(ln)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Birth/death pairs for one homology dimension.

    Essential classes carry death = inf. Zero-persistence pairs are not
    recorded.
    """

    dimension: int
    pairs: np.ndarray  # (m, 2) float64, death possibly inf

    @property
    def finite_pairs(self) -> np.ndarray:
        return self.pairs[np.isfinite(self.pairs[:, 1])]

    @property
    def essential_count(self) -> int:
        return int(np.count_nonzero(~np.isfinite(self.pairs[:, 1])))

    def betti_at(self, epsilon: float) -> int:
        """Number of intervals with birth <= epsilon < death."""
        if self.pairs.size == 0:
            return 0
        b, d = self.pairs[:, 0], self.pairs[:, 1]
        return int(np.count_nonzero((b <= epsilon) & (epsilon < d)))


@dataclass(frozen=True)
class HoleMetrics:
    """Counts and persistence mass of the significant H1 features."""

    n_holes: int
    tau: float
    total_persistence: float
    avg_persistence: float
    persistence_density: float
    # Alternative density reading: total persistence over the whole
    # filtration span [0, epsilon_max]; None when epsilon_max is unknown.
    persistence_density_filtration: Optional[float] = None


def subsample_cloud(
    cloud: PointCloud,
    max_points: int = DEFAULT_MAX_POINTS,
    seed: int = DEFAULT_SEED,
) -> PointCloud:
    """Deterministic uniform subsample used before filtration.

    Returns the cloud unchanged when it is already small enough. Selected
    indices are sorted so point order stays stable.
    """
    if max_points < 1:
        raise ParameterError(f"max_points must be >= 1, got {max_points}")
    if cloud.n <= max_points:
        return cloud
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(cloud.n, size=max_points, replace=False))
    return PointCloud(cloud.points[keep], label=cloud.label)


def build_filtration(
    cloud: PointCloud, epsilon_max: Union[float, str] = "auto"
) -> Filtration:
    """All edges up to epsilon_max, sorted by (length, i, j).

    epsilon_max "auto" resolves to the cloud diameter, which guarantees
    every loop can die and the diagram has no essential H1 classes.
    """
    if epsilon_max == "auto":
        cap = diameter(cloud)
    else:
        cap = float(epsilon_max)
        if cap < 0:
            raise ParameterError(f"epsilon_max must be >= 0, got {cap}")
    pts = cloud.points
    n = cloud.n
    dist = np.empty((n, n))
    step = _block_rows(n, cloud.p)
    for start in range(0, n, step):
        stop = min(start + step, n)
        dist[start:stop] = _pairwise_block(pts[start:stop], pts)
    iu, ju = np.triu_indices(n, k=1)
    lengths = dist[iu, ju]
    keep = lengths <= cap
    iu, ju, lengths = iu[keep], ju[keep], lengths[keep]
    order = np.lexsort((ju, iu, lengths))
    return Filtration(
        vertex_count=n,
        edge_i=iu[order].astype(np.int64),
        edge_j=ju[order].astype(np.int64),
        edge_length=lengths[order],
        epsilon_max=cap,
    )


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _h0_and_positive_edges(filtration: Filtration):
    """Union-find sweep: H0 deaths plus the mask of cycle-creating edges."""
    uf = _UnionFind(filtration.vertex_count)
    deaths = []
    positive = np.zeros(filtration.edge_count, dtype=bool)
    for idx, (a, b, ln) in enumerate(filtration.edges()):
        if uf.union(a, b):
            deaths.append(ln)  # a component dies (all born at 0)
        else:
            positive[idx] = True
    components = len({uf.find(v) for v in range(filtration.vertex_count)})
    pairs = [(0.0, d) for d in deaths if d > 0.0]
    pairs.extend((0.0, np.inf) for _ in range(components))
    dgm0 = PersistenceDiagram(
        dimension=0,
        pairs=np.asarray(pairs, dtype=np.float64).reshape(-1, 2),
    )
    return dgm0, positive


def _enclosing_radius(filtration: Filtration) -> float:
    """min over vertices of the max edge length, for complete-star vertices."""
    n = filtration.vertex_count
    if n == 1:
        return 0.0
    degree = np.zeros(n, dtype=np.int64)
    longest = np.zeros(n, dtype=np.float64)
    for arr in (filtration.edge_i, filtration.edge_j):
        np.add.at(degree, arr, 1)
        np.maximum.at(longest, arr, filtration.edge_length)
    complete = degree == n - 1
    if not complete.any():
        return np.inf
    return float(longest[complete].min())


def _edge_index_matrix(filtration: Filtration) -> np.ndarray:
    n = filtration.vertex_count
    mat = np.full((n, n), -1, dtype=np.int64)
    idx = np.arange(filtration.edge_count, dtype=np.int64)
    mat[filtration.edge_i, filtration.edge_j] = idx
    mat[filtration.edge_j, filtration.edge_i] = idx
    return mat


def persistence(
    filtration: Filtration,
) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """H0 and H1 persistence diagrams of the filtration."""
    from . import _kernel  # resolved backend (compiled or pure Python)

    dgm0, positive = _h0_and_positive_edges(filtration)
    n = filtration.vertex_count
    if n < 3 or filtration.edge_count == 0:
        return dgm0, PersistenceDiagram(dimension=1, pairs=np.empty((0, 2)))

    r_enc = _enclosing_radius(filtration)
    t_cap = min(filtration.epsilon_max, r_enc)
    eidx = _edge_index_matrix(filtration)
    paired_edges, deaths = _kernel.reduce_h1(
        n,
        np.ascontiguousarray(filtration.edge_i),
        np.ascontiguousarray(filtration.edge_j),
        np.ascontiguousarray(filtration.edge_length),
        eidx,
        float(t_cap),
    )
    paired_edges = np.asarray(paired_edges, dtype=np.int64)
    deaths = np.asarray(deaths, dtype=np.float64)
    births = filtration.edge_length[paired_edges]
    if np.any(deaths < births):
        raise PmgError("reduction produced a death below its birth")

    keep = deaths > births
    pairs = np.column_stack([births[keep], deaths[keep]])

    unpaired = positive.copy()
    unpaired[paired_edges] = False
    if r_enc <= filtration.epsilon_max:
        # Cone exists inside the cap: every unpaired positive edge sits at
        # or beyond the enclosing radius and its class dies on arrival.
        if np.any(filtration.edge_length[unpaired] < r_enc):
            raise PmgError("unpaired positive edge below the enclosing radius")
    else:
        essential_births = filtration.edge_length[unpaired]
        if essential_births.size:
            inf_col = np.full(essential_births.shape, np.inf)
            pairs = np.vstack([pairs, np.column_stack([essential_births, inf_col])])

    order = np.lexsort((pairs[:, 1], pairs[:, 0])) if pairs.size else []
    dgm1 = PersistenceDiagram(dimension=1, pairs=pairs[order].reshape(-1, 2))
    return dgm0, dgm1


def betti_numbers(filtration: Filtration, epsilon: float) -> tuple[int, int]:
    """(beta0, beta1) at a fixed scale, counted from the diagrams."""
    if not 0 <= epsilon <= filtration.epsilon_max:
        raise ParameterError(
            f"epsilon must lie in [0, epsilon_max={filtration.epsilon_max}], got {epsilon}"
        )
    dgm0, dgm1 = persistence(filtration)
    return dgm0.betti_at(epsilon), dgm1.betti_at(epsilon)


def hole_metrics(
    h1: PersistenceDiagram,
    tau: Union[float, str],
    cloud_diameter: float,
    epsilon_max: Optional[float] = None,
) -> HoleMetrics:
    """Count and weigh the significant (persistence > tau) finite H1 pairs.

    tau "auto" resolves to 0.1 * cloud_diameter. Essential classes are
    excluded here and reported separately by callers. The density
    denominator is the birth-to-death span of the significant features;
    the whole-filtration reading [0, epsilon_max] is also computed when
    epsilon_max is given.
    """
    if tau == "auto":
        tau_val = 0.1 * float(cloud_diameter)
    else:
        tau_val = float(tau)
    if tau_val < 0:
        raise ParameterError(f"tau must be >= 0, got {tau_val}")
    finite = h1.finite_pairs
    persist = finite[:, 1] - finite[:, 0]
    significant = finite[persist > tau_val]
    n_holes = int(significant.shape[0])
    if n_holes == 0:
        return HoleMetrics(
            n_holes=0,
            tau=tau_val,
            total_persistence=0.0,
            avg_persistence=0.0,
            persistence_density=0.0,
            persistence_density_filtration=(
                0.0 if epsilon_max is not None and epsilon_max > 0 else None
            ),
        )
    total = float((significant[:, 1] - significant[:, 0]).sum())
    span = float(significant[:, 1].max() - significant[:, 0].min())
    density_alt = None
    if epsilon_max is not None and epsilon_max > 0:
        density_alt = total / float(epsilon_max)
    return HoleMetrics(
        n_holes=n_holes,
        tau=tau_val,
        total_persistence=total,
        avg_persistence=total / n_holes,
        persistence_density=total / span if span > 0 else 0.0,
        persistence_density_filtration=density_alt,
    )
