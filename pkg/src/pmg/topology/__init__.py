"""Vietoris-Rips persistence (H0/H1) and hole metrics.

The reduction kernel has two interchangeable implementations: a compiled
Cython extension (built at install time) and a pure-Python fallback. The
compiled one is picked automatically when importable; set PMG_PURE_PYTHON=1
to force the fallback. Both produce identical diagrams.
"""

import os

if os.environ.get("PMG_PURE_PYTHON", "0") not in ("", "0"):
    from . import _reduction_py as _kernel
else:
    try:
        from . import _reduction as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _reduction_py as _kernel


def backend_name() -> str:
    """Which reduction kernel is active: "compiled" or "python"."""
    return _kernel.BACKEND


from ._core import (  # noqa: E402
    DEFAULT_MAX_POINTS,
    DEFAULT_SEED,
    Filtration,
    HoleMetrics,
    PersistenceDiagram,
    betti_numbers,
    build_filtration,
    hole_metrics,
    persistence,
    subsample_cloud,
)

__all__ = [
    "DEFAULT_MAX_POINTS",
    "DEFAULT_SEED",
    "Filtration",
    "HoleMetrics",
    "PersistenceDiagram",
    "backend_name",
    "betti_numbers",
    "build_filtration",
    "hole_metrics",
    "persistence",
    "subsample_cloud",
]
