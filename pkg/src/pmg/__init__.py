"""Geometric complexity of embedded point clouds.

Quantifies point-cloud manifolds three ways: intrinsic dimension from
k-nearest-neighbor distance ratios (MLE and TLE estimators), a pointwise
Gaussian-curvature proxy from local quadratic fits, and significant-hole
metrics from Vietoris-Rips H1 persistence. A bias report joins per-class
complexity with per-class accuracy through Pearson correlation.
"""

from .analysis import (
    BiasReport,
    ComplexityProfile,
    ProfileConfig,
    build_bias_report,
    pearson,
    profile_class,
    sample_manifold,
)
from .curvature import (
    CurvatureEstimates,
    LocalFrame,
    curvature_profile,
    gaussian_curvature_at,
    local_frame,
)
from .errors import (
    DegenerateFrameError,
    FormatError,
    ParameterError,
    PmgError,
    UndefinedCorrelationError,
    ValidationError,
)
from .intrinsic_dim import (
    LocalIdEstimates,
    global_id,
    local_id_mle,
    local_id_tle,
)
from .pointcloud import (
    NeighborGraph,
    PointCloud,
    diameter,
    knn,
    load_point_cloud,
    save_point_cloud,
)
from .topology import (
    Filtration,
    HoleMetrics,
    PersistenceDiagram,
    betti_numbers,
    build_filtration,
    hole_metrics,
    persistence,
    subsample_cloud,
)

__version__ = "0.1.0"
